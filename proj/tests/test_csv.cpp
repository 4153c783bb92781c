#include "ctp/csv.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "ctp/errors.hpp"

namespace ctp {
namespace {

TEST(CsvNum, SeventeenSignificantDigitsRoundTrip) {
    // 17 significant decimal digits identify every double uniquely.
    for (double x : {1.0, -1.0, 0.1, 1e-300, 9.0425607525226823, 1234567.89,
                     std::numeric_limits<double>::denorm_min()}) {
        const std::string s = csv_num(x);
        double back = 0.0;
        std::istringstream(s) >> back;
        EXPECT_EQ(back, x) << s;
    }
    EXPECT_EQ(csv_num(1.0), "1.0000000000000000e+00");
    EXPECT_EQ(csv_num(0.0), "0.0000000000000000e+00");
}

TEST(CsvNum, SpecialValuesAreNamed) {
    EXPECT_EQ(csv_num(std::nan("")), "nan");
    EXPECT_EQ(csv_num(std::numeric_limits<double>::infinity()), "inf");
    EXPECT_EQ(csv_num(-std::numeric_limits<double>::infinity()), "-inf");
}

TEST(CsvNum, IntegersUsePlainDecimal) {
    EXPECT_EQ(csv_num(uint64_t{0}), "0");
    EXPECT_EQ(csv_num(uint64_t{18446744073709551615ULL}), "18446744073709551615");
    EXPECT_EQ(csv_num(int64_t{-42}), "-42");
}

TEST(CsvText, SanitizesSeparatorsAndLineBreaks) {
    EXPECT_EQ(csv_text("plain"), "plain");
    EXPECT_EQ(csv_text("a,b"), "a;b");
    EXPECT_EQ(csv_text("line\nbreak\rhere"), "line;break;here");
}

TEST(CsvTable, AddRowChecksArity) {
    CsvTable t;
    t.columns = {"a", "b"};
    EXPECT_NO_THROW(t.add_row({"1", "2"}));
    EXPECT_THROW(t.add_row({"1"}), Error);
    EXPECT_THROW(t.add_row({"1", "2", "3"}), Error);
}

TEST(RenderCsv, LayoutAndDeterminism) {
    CsvTable t;
    t.comments = {"experiment = demo", "seed = 4"};
    t.columns = {"x", "label"};
    t.add_row({csv_num(0.5), csv_text("first")});
    t.add_row({csv_num(uint64_t{7}), csv_text("second,cell")});
    const std::string want =
        "# experiment = demo\n"
        "# seed = 4\n"
        "x,label\n"
        "5.0000000000000000e-01,first\n"
        "7,second;cell\n";
    EXPECT_EQ(render_csv(t), want);
    EXPECT_EQ(render_csv(t), render_csv(t));
}

TEST(WriteCsv, WritesBinaryExactFile) {
    const auto dir = std::filesystem::temp_directory_path() / "ctp_csv_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "table.csv").string();
    CsvTable t;
    t.columns = {"v"};
    t.add_row({csv_num(1.0 / 3.0)});
    write_csv(path, t);
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    EXPECT_EQ(buf.str(), render_csv(t));
    std::filesystem::remove_all(dir);
}

TEST(WriteCsv, UnwritablePathThrows) {
    CsvTable t;
    t.columns = {"v"};
    EXPECT_THROW(write_csv("/nonexistent-dir/nope/file.csv", t), Error);
}

}  // namespace
}  // namespace ctp

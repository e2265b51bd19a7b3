#include <gtest/gtest.h>

#include <cstdlib>
#include <random>

#include <nlohmann/json.hpp>

#include "fakes.hpp"
#include "socratic/analytics.hpp"
#include "socratic/errors.hpp"
#include "socratic/serialization.hpp"

using namespace socratic;
using namespace socratic::analytics;

namespace {

// Set SOCRATIC_UPDATE_GOLDEN=1 to rewrite the files instead of comparing.
void expect_golden(const std::string& name, const std::string& actual) {
    const auto path = std::filesystem::path(SOCRATIC_GOLDEN_DIR) / name;
    if (std::getenv("SOCRATIC_UPDATE_GOLDEN") != nullptr) {
        write_file_atomic(path, actual);
        return;
    }
    ASSERT_TRUE(std::filesystem::exists(path)) << path;
    EXPECT_EQ(actual, read_file(path)) << name;
}

/// Counts each score value and weighs by its unit score numerator.
Rational counting_oracle(const std::vector<int>& scores) {
    std::int64_t c[5] = {0, 0, 0, 0, 0};
    for (int d : scores) ++c[d + 2];
    const std::int64_t numer = 0 * c[0] + 1 * c[1] + 3 * c[3] + 4 * c[4];
    return Rational(numer, 4 * static_cast<std::int64_t>(scores.size()));
}

std::vector<int> random_scores(std::mt19937_64& rng, std::size_t n) {
    static constexpr int kValues[] = {-2, -1, 1, 2};
    std::uniform_int_distribution<int> pick(0, 3);
    std::vector<int> out(n);
    for (auto& d : out) d = kValues[pick(rng)];
    return out;
}

PreferenceMatrix figure_matrix() {
    const auto doc = nlohmann::json::parse(
        read_file(std::filesystem::path(SOCRATIC_SOURCE_DIR) / "tests" / "fixtures" / "overall_quality_figure.json"));
    const auto& p = doc.at("percent");
    PreferenceMatrix m(canonical_config_grid(), criterion_from_string(doc.at("criterion").get<std::string>()));
    for (std::size_t r = 0; r < 12; ++r) {
        for (std::size_t c = r + 1; c < 12; ++c) m.set_pair(r, c, Rational(p[r][c].get<int>(), 100), 25);
    }
    return m;
}

std::vector<Rq2Row> figure_rq2_rows() {
    const int v[4][4] = {{64, 75, 46, 58}, {60, 67, 77, 54}, {60, 60, 36, 50}, {20, 92, 91, 60}};
    std::vector<Rq2Row> rows;
    const auto order = rq2_row_order();
    for (std::size_t r = 0; r < 4; ++r) {
        Rq2Row row{order[r], {}};
        for (std::size_t i = 0; i < 4; ++i) row.gamma[i] = Rational(v[r][i], 100);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

TEST(Gamma, SmallCases) {
    EXPECT_EQ(gamma(std::vector<int>{2}), Rational(1));
    EXPECT_EQ(gamma(std::vector<int>{-2}), Rational(0));
    EXPECT_EQ(gamma(std::vector<int>{1, -1}), Rational(1, 2));
    EXPECT_EQ(gamma(std::vector<int>{2, 2, 1, -1}), Rational(3, 4));
    EXPECT_THROW(gamma(std::vector<int>{}), EmptyCell);
    EXPECT_THROW(gamma(std::vector<int>{0}), ValidationError);
}

TEST(Gamma, PropertiesAgainstCountingOracle) {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::size_t> len(1, 60);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto scores = random_scores(rng, len(rng));
        const Rational g = gamma(scores);
        ASSERT_EQ(g, counting_oracle(scores));
        ASSERT_GE(g, Rational(0));
        ASSERT_LE(g, Rational(1));
        // Flipping every score mirrors the index.
        std::vector<int> flipped(scores);
        for (auto& d : flipped) d = -d;
        ASSERT_EQ(gamma(flipped), Rational(1) - g);
        // Order does not matter.
        auto shuffled = scores;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        ASSERT_EQ(gamma(shuffled), g);
    }
}

TEST(Matrix, MirrorCellsAndCounts) {
    std::mt19937_64 rng(5);
    const auto configs = canonical_config_grid();
    std::vector<CellJudgments> cells;
    for (std::size_t r = 0; r < configs.size(); ++r) {
        for (std::size_t c = r + 1; c < configs.size(); ++c) {
            // Supply half of the cells from the other orientation.
            if ((r + c) % 2 == 0) {
                cells.push_back({configs[r], configs[c], random_scores(rng, 25)});
            } else {
                cells.push_back({configs[c], configs[r], random_scores(rng, 25)});
            }
        }
    }
    const auto m = build_matrix(configs, Criterion::Depth, cells);
    EXPECT_TRUE(m.complete());
    for (std::size_t r = 0; r < 12; ++r) {
        EXPECT_FALSE(m.cell(r, r).has_value());
        for (std::size_t c = 0; c < 12; ++c) {
            if (r == c) continue;
            EXPECT_EQ(*m.cell(r, c) + *m.cell(c, r), Rational(1));
            EXPECT_EQ(m.count(r, c), 25);
        }
    }
    for (const auto& cell : cells) {
        EXPECT_EQ(*m.cell(*m.index_of(cell.alpha), *m.index_of(cell.beta)), counting_oracle(cell.oriented_scores));
    }
}

TEST(Matrix, MissingCellsAreNamed) {
    const auto configs = canonical_config_grid();
    std::vector<CellJudgments> cells;
    for (std::size_t r = 0; r < 12; ++r) {
        for (std::size_t c = r + 1; c < 12; ++c) {
            if (r == 0 && (c == 1 || c == 5)) continue;
            cells.push_back({configs[r], configs[c], {1}});
        }
    }
    try {
        build_matrix(configs, Criterion::Clarity, cells);
        FAIL() << "expected MissingCell";
    } catch (const MissingCell& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find("2 unjudged"), std::string::npos);
        EXPECT_NE(what.find("DYN/L1/M1 vs DYN/L1/M0"), std::string::npos);
        EXPECT_NE(what.find("DYN/L1/M1 vs F05/L1/M0"), std::string::npos);
    }
}

TEST(Matrix, RejectsBadInput) {
    const auto configs = canonical_config_grid();
    EXPECT_THROW(build_matrix(configs, Criterion::Clarity, {{configs[0], configs[0], {1}}}), ValidationError);
    EXPECT_THROW(build_matrix({configs[0], configs[1]}, Criterion::Clarity,
                              {{configs[0], configs[1], {1}}, {configs[1], configs[0], {1}}}),
                 ValidationError);
    EXPECT_THROW(build_matrix({configs[0], configs[1]}, Criterion::Clarity, {{configs[0], configs[2], {1}}}),
                 ValidationError);
    EXPECT_THROW(build_matrix({configs[0], configs[1]}, Criterion::Clarity, {{configs[0], configs[1], {}}}), EmptyCell);
    PreferenceMatrix m({configs[0], configs[1]}, Criterion::Clarity);
    EXPECT_THROW(m.set_pair(0, 0, Rational(1, 2), 1), ValidationError);
    EXPECT_THROW(m.set_pair(0, 1, Rational(3, 2), 1), ValidationError);
    EXPECT_THROW(export_matrix(m, ExportFormat::Csv), MissingCell);
}

TEST(Matrix, SmallValuesRenderAtTwoPlaces) {
    const auto configs = canonical_config_grid();
    PreferenceMatrix m({configs[0], configs[1]}, Criterion::OverallQuality);
    m.set_pair(0, 1, Rational(3, 100), 25);
    const auto text = export_matrix(m, ExportFormat::TextHeatmap);
    EXPECT_NE(text.find("  0.03"), std::string::npos);
    EXPECT_NE(text.find("  0.97"), std::string::npos);
}

TEST(Export, CsvRoundTrip) {
    std::mt19937_64 rng(8);
    const auto configs = canonical_config_grid();
    std::vector<CellJudgments> cells;
    for (std::size_t r = 0; r < 12; ++r) {
        for (std::size_t c = r + 1; c < 12; ++c) cells.push_back({configs[r], configs[c], random_scores(rng, 7)});
    }
    const auto m = build_matrix(configs, Criterion::Relevance, cells);
    const auto imported = import_matrix_csv(export_matrix(m, ExportFormat::Csv));
    ASSERT_EQ(imported.size(), 132u);
    for (const auto& cell : imported) {
        const auto r = *m.index_of(ExperimentConfig::parse_label(cell.alpha));
        const auto c = *m.index_of(ExperimentConfig::parse_label(cell.beta));
        EXPECT_NEAR(cell.gamma, m.cell(r, c)->to_double(), 5e-5);
        EXPECT_EQ(cell.count, 7);
    }
    EXPECT_THROW(import_matrix_csv("a,b\n"), ValidationError);
}

TEST(Export, JsonShape) {
    const auto m = figure_matrix();
    const auto doc = nlohmann::json::parse(export_matrix(m, ExportFormat::Json));
    EXPECT_EQ(doc.at("criterion"), "overall_quality");
    EXPECT_EQ(doc.at("configs").size(), 12u);
    EXPECT_EQ(doc.at("cells").size(), 132u);
    EXPECT_EQ(doc.at("cells")[0].at("alpha"), "DYN/L1/M1");
    EXPECT_EQ(doc.at("cells")[0].at("beta"), "DYN/L1/M0");
    EXPECT_DOUBLE_EQ(doc.at("cells")[0].at("gamma").get<double>(), 0.03);
}

TEST(Figure, PublishedMatrixIsNearlyMirrorConsistent) {
    // The published values are rounded, so mirrors may be off by a point.
    const auto doc = nlohmann::json::parse(
        read_file(std::filesystem::path(SOCRATIC_SOURCE_DIR) / "tests" / "fixtures" / "overall_quality_figure.json"));
    const auto& p = doc.at("percent");
    for (std::size_t r = 0; r < 12; ++r) {
        EXPECT_TRUE(p[r][r].is_null());
        for (std::size_t c = 0; c < 12; ++c) {
            if (r != c) EXPECT_NEAR(p[r][c].get<int>() + p[c][r].get<int>(), 100, 1) << r << "," << c;
        }
    }
}

TEST(Golden, OverallQualityHeatmap) {
    const auto m = figure_matrix();
    expect_golden("overall_quality_heatmap.txt", export_matrix(m, ExportFormat::TextHeatmap));
    expect_golden("overall_quality.csv", export_matrix(m, ExportFormat::Csv));
}

TEST(Rq2, GoldenReportFromPublishedRows) {
    auto rows = figure_rq2_rows();
    std::reverse(rows.begin(), rows.end());  // input order must not matter
    expect_golden("rq2_report.txt", rq2_report(rows, ExportFormat::TextHeatmap));
    expect_golden("rq2_report.csv", rq2_report(rows, ExportFormat::Csv));
}

TEST(Rq2, VerdictBands) {
    auto rows = figure_rq2_rows();
    for (auto& row : rows) row.gamma = {Rational(1, 2), Rational(1, 2), Rational(1, 2), Rational(1, 2)};
    const auto text = rq2_report(rows, ExportFormat::TextHeatmap);
    EXPECT_NE(text.find("Clarity: mean 0.50, no consistent advantage"), std::string::npos);

    for (auto& row : rows) row.gamma = {Rational(53, 100), Rational(47, 100), Rational(52, 100), Rational(48, 100)};
    const auto edge = rq2_report(rows, ExportFormat::TextHeatmap);
    EXPECT_NE(edge.find("Clarity: mean 0.53, R-in-R preferred"), std::string::npos);
    EXPECT_NE(edge.find("Relevance: mean 0.47, one-shot preferred"), std::string::npos);
    EXPECT_NE(edge.find("Depth: mean 0.52, no consistent advantage"), std::string::npos);
    EXPECT_NE(edge.find("Overall Quality: mean 0.48, no consistent advantage"), std::string::npos);
}

TEST(Rq2, MissingValues) {
    auto rows = figure_rq2_rows();
    rows[2].gamma[1].reset();
    EXPECT_THROW(rq2_report(rows, ExportFormat::Csv), MissingCell);
    rows.pop_back();
    EXPECT_THROW(rq2_report(rows, ExportFormat::Csv), MissingCell);
}

TEST(Rq2, JsonShape) {
    const auto doc = nlohmann::json::parse(rq2_report(figure_rq2_rows(), ExportFormat::Json));
    EXPECT_EQ(doc.at("rows").size(), 4u);
    EXPECT_EQ(doc.at("rows")[3].at("level"), false);
    EXPECT_DOUBLE_EQ(doc.at("rows")[3].at("relevance").get<double>(), 0.92);
}

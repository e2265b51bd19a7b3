#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "socratic/domain.hpp"
#include "socratic/rational.hpp"

namespace socratic::analytics {

/// Mean unit score of a non-empty multiset of oriented scores.
/// Throws EmptyCell on empty input, ValidationError on out-of-domain values.
Rational gamma(std::span<const int> oriented_scores);

/// Scores oriented toward `alpha` for one judged cell.
struct CellJudgments {
    ExperimentConfig alpha;
    ExperimentConfig beta;
    std::vector<int> oriented_scores;
};

/// Square γ matrix over an ordered config list. The diagonal is undefined.
class PreferenceMatrix {
public:
    PreferenceMatrix(std::vector<ExperimentConfig> configs, Criterion criterion);

    const std::vector<ExperimentConfig>& configs() const noexcept { return configs_; }
    Criterion criterion() const noexcept { return criterion_; }
    std::size_t size() const noexcept { return configs_.size(); }

    const std::optional<Rational>& cell(std::size_t row, std::size_t col) const;
    int count(std::size_t row, std::size_t col) const;
    std::optional<std::size_t> index_of(const ExperimentConfig& cfg) const;

    /// Sets (row, col) to gamma and (col, row) to 1 - gamma.
    void set_pair(std::size_t row, std::size_t col, Rational gamma, int count);

    bool complete() const;

private:
    std::vector<ExperimentConfig> configs_;
    Criterion criterion_;
    std::vector<std::optional<Rational>> cells_;
    std::vector<int> counts_;
};

/// Fills every unordered pair from its judgments and derives the mirror.
/// Throws MissingCell naming all absent pairs, ValidationError on a pair
/// supplied twice or a config outside `configs`.
PreferenceMatrix build_matrix(const std::vector<ExperimentConfig>& configs, Criterion criterion,
                              const std::vector<CellJudgments>& cells);

enum class ExportFormat { Csv, Json, TextHeatmap };

ExportFormat export_format_from_string(std::string_view text);

/// csv: `alpha,beta,gamma,count` rows in row-major order, gamma to 4 places.
/// json: {criterion, configs, cells:[{alpha, beta, gamma, count}]}.
/// text_heatmap: monospace grid, 2-decimal values, diagonal marked with a bullet.
std::string export_matrix(const PreferenceMatrix& matrix, ExportFormat format);

struct ImportedCell {
    std::string alpha;
    std::string beta;
    double gamma = 0.0;
    int count = 0;
};

/// Reads back the csv export.
std::vector<ImportedCell> import_matrix_csv(std::string_view csv);

/// Context condition (level flag, materials flag) for baseline comparison.
struct ContextFlags {
    bool level = true;
    bool materials = true;

    bool operator==(const ContextFlags&) const = default;
};

/// Rows in figure order: (1,1), (1,0), (0,1), (0,0).
std::array<ContextFlags, 4> rq2_row_order();

struct Rq2Row {
    ContextFlags flags;
    std::array<std::optional<Rational>, 4> gamma;  // indexed like kAllCriteria
};

/// Values within this distance of 0.5 count as no consistent advantage.
inline const Rational kNeutralBand{1, 50};

/// Renders the 4x4 protocol-vs-baseline table. Throws MissingCell when any
/// of the 16 values is absent.
std::string rq2_report(const std::vector<Rq2Row>& rows, ExportFormat format);

}  // namespace socratic::analytics

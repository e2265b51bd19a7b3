#include "socratic/analytics.hpp"

#include <cstdio>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "socratic/errors.hpp"
#include "socratic/text.hpp"

namespace socratic::analytics {

using nlohmann::json;

Rational gamma(std::span<const int> oriented_scores) {
    if (oriented_scores.empty()) throw EmptyCell("cannot compute a preference index over no judgments");
    // sum of (2 + d)/4 over n items = (2n + sum d) / 4n
    std::int64_t sum = 0;
    for (const int d : oriented_scores) {
        if (d != -2 && d != -1 && d != 1 && d != 2) {
            throw ValidationError("oriented score out of range: " + std::to_string(d));
        }
        sum += d;
    }
    const auto n = static_cast<std::int64_t>(oriented_scores.size());
    return Rational(2 * n + sum, 4 * n);
}

// ---------------------------------------------------------------------------

PreferenceMatrix::PreferenceMatrix(std::vector<ExperimentConfig> configs, Criterion criterion)
    : configs_(std::move(configs)),
      criterion_(criterion),
      cells_(configs_.size() * configs_.size()),
      counts_(configs_.size() * configs_.size(), 0) {}

const std::optional<Rational>& PreferenceMatrix::cell(std::size_t row, std::size_t col) const {
    return cells_.at(row * size() + col);
}

int PreferenceMatrix::count(std::size_t row, std::size_t col) const { return counts_.at(row * size() + col); }

std::optional<std::size_t> PreferenceMatrix::index_of(const ExperimentConfig& cfg) const {
    for (std::size_t i = 0; i < configs_.size(); ++i) {
        if (configs_[i] == cfg) return i;
    }
    return std::nullopt;
}

void PreferenceMatrix::set_pair(std::size_t row, std::size_t col, Rational g, int count) {
    if (row == col) throw ValidationError("the diagonal of a preference matrix is undefined");
    if (g < Rational(0) || g > Rational(1)) throw ValidationError("gamma outside [0,1]");
    cells_.at(row * size() + col) = g;
    cells_.at(col * size() + row) = Rational(1) - g;
    counts_.at(row * size() + col) = count;
    counts_.at(col * size() + row) = count;
}

bool PreferenceMatrix::complete() const {
    for (std::size_t r = 0; r < size(); ++r) {
        for (std::size_t c = 0; c < size(); ++c) {
            if (r != c && !cell(r, c)) return false;
        }
    }
    return true;
}

PreferenceMatrix build_matrix(const std::vector<ExperimentConfig>& configs, Criterion criterion,
                              const std::vector<CellJudgments>& cells) {
    PreferenceMatrix matrix(configs, criterion);
    for (const auto& cell : cells) {
        const auto row = matrix.index_of(cell.alpha);
        const auto col = matrix.index_of(cell.beta);
        if (!row || !col) {
            throw ValidationError("judgments for " + cell.alpha.label() + " vs " + cell.beta.label() +
                                  " reference a config outside the matrix");
        }
        if (*row == *col) throw ValidationError("a config cannot be compared with itself: " + cell.alpha.label());
        if (matrix.cell(*row, *col)) {
            throw ValidationError("cell " + cell.alpha.label() + " vs " + cell.beta.label() + " supplied twice");
        }
        matrix.set_pair(*row, *col, gamma(cell.oriented_scores), static_cast<int>(cell.oriented_scores.size()));
    }

    std::vector<std::string> missing;
    for (std::size_t r = 0; r < configs.size(); ++r) {
        for (std::size_t c = r + 1; c < configs.size(); ++c) {
            if (!matrix.cell(r, c)) missing.push_back(configs[r].label() + " vs " + configs[c].label());
        }
    }
    if (!missing.empty()) {
        throw MissingCell(std::to_string(missing.size()) + " unjudged cell(s): " + text::join(missing, ", "));
    }
    return matrix;
}

// ---------------------------------------------------------------------------

ExportFormat export_format_from_string(std::string_view text) {
    if (text == "csv") return ExportFormat::Csv;
    if (text == "json") return ExportFormat::Json;
    if (text == "text" || text == "text_heatmap") return ExportFormat::TextHeatmap;
    throw ValidationError("unknown export format '" + std::string(text) + "'");
}

namespace {

constexpr std::string_view kCheck = "\xE2\x9C\x93";   // ✓
constexpr std::string_view kCross = "\xE2\x9C\x97";   // ✗
constexpr std::string_view kBullet = "\xE2\x80\xA2";  // •

std::string_view mark(bool flag) { return flag ? kCheck : kCross; }

std::string pad_left(std::string_view s, std::size_t width, std::size_t display_width) {
    return std::string(width > display_width ? width - display_width : 0, ' ') + std::string(s);
}

std::string pad_left(std::string_view s, std::size_t width) { return pad_left(s, width, s.size()); }

std::string pad_right(std::string_view s, std::size_t width) {
    return std::string(s) + std::string(width > s.size() ? width - s.size() : 0, ' ');
}

void require_complete(const PreferenceMatrix& m) {
    if (!m.complete()) throw MissingCell("matrix for " + std::string(display_name(m.criterion())) + " is incomplete");
}

std::string matrix_csv(const PreferenceMatrix& m) {
    std::string out = "alpha,beta,gamma,count\n";
    for (std::size_t r = 0; r < m.size(); ++r) {
        for (std::size_t c = 0; c < m.size(); ++c) {
            if (r == c) continue;
            out += m.configs()[r].label() + "," + m.configs()[c].label() + "," + m.cell(r, c)->to_fixed(4) + "," +
                   std::to_string(m.count(r, c)) + "\n";
        }
    }
    return out;
}

std::string matrix_json(const PreferenceMatrix& m) {
    json configs = json::array();
    for (const auto& cfg : m.configs()) configs.push_back(cfg.label());
    json cells = json::array();
    for (std::size_t r = 0; r < m.size(); ++r) {
        for (std::size_t c = 0; c < m.size(); ++c) {
            if (r == c) continue;
            cells.push_back({{"alpha", m.configs()[r].label()},
                             {"beta", m.configs()[c].label()},
                             {"gamma", std::stod(m.cell(r, c)->to_fixed(4))},
                             {"count", m.count(r, c)}});
        }
    }
    return json{{"criterion", slug(m.criterion())}, {"configs", std::move(configs)}, {"cells", std::move(cells)}}
               .dump(2) +
           "\n";
}

std::string matrix_heatmap(const PreferenceMatrix& m) {
    constexpr std::size_t kCell = 6;
    std::ostringstream out;
    out << display_name(m.criterion()) << ": gamma(alpha, beta), rows alpha, columns beta\n\n";

    out << " #  IT   L  M  |";
    for (std::size_t c = 0; c < m.size(); ++c) out << pad_left(std::to_string(c + 1), kCell);
    out << "\n";
    out << std::string(15, '-') << "+" << std::string(kCell * m.size(), '-') << "\n";

    for (std::size_t r = 0; r < m.size(); ++r) {
        const auto& cfg = m.configs()[r];
        out << pad_left(std::to_string(r + 1), 2) << "  " << pad_right(cfg.regime.code(), 4) << " "
            << mark(cfg.level_provided) << "  " << mark(cfg.materials_provided) << "  |";
        for (std::size_t c = 0; c < m.size(); ++c) {
            if (r == c) {
                out << pad_left(kBullet, kCell, 1);
            } else {
                out << pad_left(m.cell(r, c)->to_fixed(2), kCell);
            }
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace

std::string export_matrix(const PreferenceMatrix& matrix, ExportFormat format) {
    require_complete(matrix);
    switch (format) {
        case ExportFormat::Csv: return matrix_csv(matrix);
        case ExportFormat::Json: return matrix_json(matrix);
        case ExportFormat::TextHeatmap: return matrix_heatmap(matrix);
    }
    return {};
}

std::vector<ImportedCell> import_matrix_csv(std::string_view csv) {
    std::vector<ImportedCell> cells;
    std::istringstream in{std::string(csv)};
    std::string line;
    if (!std::getline(in, line) || text::trim(line) != "alpha,beta,gamma,count") {
        throw ValidationError("matrix csv must start with the header 'alpha,beta,gamma,count'");
    }
    while (std::getline(in, line)) {
        if (text::trim(line).empty()) continue;
        std::vector<std::string> fields;
        std::istringstream row(line);
        for (std::string field; std::getline(row, field, ',');) fields.push_back(field);
        if (fields.size() != 4) throw ValidationError("malformed matrix csv row: " + line);
        cells.push_back({fields[0], fields[1], std::stod(fields[2]), std::stoi(fields[3])});
    }
    return cells;
}

// ---------------------------------------------------------------------------

std::array<ContextFlags, 4> rq2_row_order() {
    return {ContextFlags{true, true}, ContextFlags{true, false}, ContextFlags{false, true}, ContextFlags{false, false}};
}

namespace {

std::string verdict(const Rational& g) {
    const Rational half(1, 2);
    if (g - half > kNeutralBand) return "R-in-R preferred";
    if (half - g > kNeutralBand) return "one-shot preferred";
    return "no consistent advantage";
}

std::vector<Rq2Row> ordered_rows(const std::vector<Rq2Row>& rows) {
    std::vector<Rq2Row> ordered;
    std::vector<std::string> missing;
    for (const auto& flags : rq2_row_order()) {
        const std::string label = std::string("L") + (flags.level ? "1" : "0") + "/M" + (flags.materials ? "1" : "0");
        const Rq2Row* found = nullptr;
        for (const auto& row : rows) {
            if (row.flags == flags) found = &row;
        }
        if (found == nullptr) {
            missing.push_back(label + " (all criteria)");
            continue;
        }
        for (std::size_t i = 0; i < kAllCriteria.size(); ++i) {
            if (!found->gamma[i]) missing.push_back(label + " " + std::string(display_name(kAllCriteria[i])));
        }
        ordered.push_back(*found);
    }
    if (!missing.empty()) throw MissingCell("baseline report is missing: " + text::join(missing, ", "));
    return ordered;
}

}  // namespace

std::string rq2_report(const std::vector<Rq2Row>& input, ExportFormat format) {
    const auto rows = ordered_rows(input);

    if (format == ExportFormat::Csv) {
        std::string out = "level,materials,criterion,gamma\n";
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < kAllCriteria.size(); ++i) {
                out += std::string(row.flags.level ? "L1" : "L0") + "," + (row.flags.materials ? "M1" : "M0") + "," +
                       std::string(slug(kAllCriteria[i])) + "," + row.gamma[i]->to_fixed(4) + "\n";
            }
        }
        return out;
    }
    if (format == ExportFormat::Json) {
        json doc = json::array();
        for (const auto& row : rows) {
            json entry{{"level", row.flags.level}, {"materials", row.flags.materials}};
            for (std::size_t i = 0; i < kAllCriteria.size(); ++i) {
                entry[std::string(slug(kAllCriteria[i]))] = std::stod(row.gamma[i]->to_fixed(4));
            }
            doc.push_back(std::move(entry));
        }
        return json{{"comparison", "rinr_dyn_vs_one_shot"}, {"rows", std::move(doc)}}.dump(2) + "\n";
    }

    std::ostringstream out;
    out << "R-in-R vs One-shot: gamma(R-in-R DYN, one-shot baseline)\n\n";
    out << " L  M  |";
    std::array<std::size_t, 4> widths{};
    for (std::size_t i = 0; i < kAllCriteria.size(); ++i) {
        widths[i] = display_name(kAllCriteria[i]).size() + 2;
        out << pad_left(display_name(kAllCriteria[i]), widths[i]);
    }
    out << "\n" << std::string(7, '-') << "+";
    for (auto w : widths) out << std::string(w, '-');
    out << "\n";
    for (const auto& row : rows) {
        out << " " << mark(row.flags.level) << "  " << mark(row.flags.materials) << "  |";
        for (std::size_t i = 0; i < kAllCriteria.size(); ++i) out << pad_left(row.gamma[i]->to_fixed(2), widths[i]);
        out << "\n";
    }
    out << "\n";
    for (std::size_t i = 0; i < kAllCriteria.size(); ++i) {
        Rational sum(0);
        for (const auto& row : rows) sum = sum + *row.gamma[i];
        const Rational mean = sum / Rational(static_cast<std::int64_t>(rows.size()));
        out << display_name(kAllCriteria[i]) << ": mean " << mean.to_fixed(2) << ", " << verdict(mean) << "\n";
    }
    return out.str();
}

}  // namespace socratic::analytics

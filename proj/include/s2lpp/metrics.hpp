#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "s2lpp/errors.hpp"

namespace s2lpp {

// ---- Exact presentation helpers ---------------------------------------------

/// Formats 100*num/den as a percentage with `decimals` fractional digits,
/// rounding half up, using integer arithmetic throughout.
inline std::string format_percent(long long num, long long den, int decimals = 1) {
    if (den == 0) throw DataError("percentage with zero denominator");
    __int128 scale = 100;
    for (int i = 0; i < decimals; ++i) scale *= 10;
    __int128 scaled = (static_cast<__int128>(num) * scale * 2 + den) / (2 * den);
    __int128 divisor = 1;
    for (int i = 0; i < decimals; ++i) divisor *= 10;
    long long whole = static_cast<long long>(scaled / divisor);
    long long frac = static_cast<long long>(scaled % divisor);
    std::string out = std::to_string(whole);
    if (decimals > 0) {
        std::string f = std::to_string(frac);
        out += "." + std::string(static_cast<std::size_t>(decimals) - f.size(), '0') + f;
    }
    return out + "%";
}

inline std::string format_fixed(double value, int decimals) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(decimals);
    out << value;
    return out.str();
}

// ---- AccuracyTable ------------------------------------------------------------

struct CellKey {
    std::string dataset;
    std::string relation;
    int prompt_index = 0;
    std::string model;

    auto operator<=>(const CellKey&) const = default;
};

struct Cell {
    long long correct = 0;
    long long total = 0;

    double accuracy() const {
        return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
    }
};

/// Per-(dataset, relation, prompt, model) accuracy cells with exact counts.
/// Persisted as CSV with header dataset,relation,prompt_index,model,correct,
/// total,accuracy and as an equivalent JSON document.
class AccuracyTable {
public:
    void add_cell(const CellKey& key, long long correct, long long total) {
        if (total <= 0) throw DataError("cell with non-positive total");
        if (correct < 0 || correct > total)
            throw DataError("cell correct count outside [0, total]");
        auto [it, inserted] = cells_.emplace(key, Cell{correct, total});
        if (!inserted)
            throw DataError("duplicate cell: " + key.dataset + "/" + key.relation + "/p" +
                            std::to_string(key.prompt_index) + "/" + key.model);
    }

    bool empty() const { return cells_.empty(); }
    std::size_t size() const { return cells_.size(); }

    const Cell* find(const CellKey& key) const {
        auto it = cells_.find(key);
        return it == cells_.end() ? nullptr : &it->second;
    }

    const Cell& at(const CellKey& key) const {
        const Cell* cell = find(key);
        if (!cell)
            throw MissingCellError(key.dataset + "/" + key.relation + "/p" +
                                   std::to_string(key.prompt_index) + "/" + key.model);
        return *cell;
    }

    const std::map<CellKey, Cell>& cells() const { return cells_; }

    std::vector<int> prompt_indices(const std::string& dataset, const std::string& relation,
                                    const std::string& model) const {
        std::vector<int> out;
        for (const auto& [key, cell] : cells_)
            if (key.dataset == dataset && key.relation == relation && key.model == model)
                out.push_back(key.prompt_index);
        return out;  // map order ⇒ ascending
    }

    std::vector<std::string> relations(const std::string& dataset,
                                       const std::string& model) const {
        std::set<std::string> seen;
        for (const auto& [key, cell] : cells_)
            if (key.dataset == dataset && key.model == model) seen.insert(key.relation);
        return {seen.begin(), seen.end()};
    }

    std::vector<std::string> models(const std::string& dataset) const {
        std::set<std::string> seen;
        for (const auto& [key, cell] : cells_)
            if (key.dataset == dataset) seen.insert(key.model);
        return {seen.begin(), seen.end()};
    }

    std::vector<std::string> datasets() const {
        std::set<std::string> seen;
        for (const auto& [key, cell] : cells_) seen.insert(key.dataset);
        return {seen.begin(), seen.end()};
    }

    void merge(const AccuracyTable& other) {
        for (const auto& [key, cell] : other.cells_) add_cell(key, cell.correct, cell.total);
    }

    void save_csv(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw CacheIoError("cannot write " + path);
        out << "dataset,relation,prompt_index,model,correct,total,accuracy\n";
        for (const auto& [key, cell] : cells_)
            out << key.dataset << "," << key.relation << "," << key.prompt_index << ","
                << key.model << "," << cell.correct << "," << cell.total << ","
                << format_fixed(cell.accuracy(), 6) << "\n";
    }

    static AccuracyTable load_csv(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw FileNotFoundError(path);
        AccuracyTable table;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            if (line_no == 1 && line.rfind("dataset,", 0) == 0) continue;  // header
            std::vector<std::string> fields;
            std::stringstream ss(line);
            std::string field;
            while (std::getline(ss, field, ',')) fields.push_back(field);
            if (fields.size() != 7)
                throw SchemaError(path, line_no, "", "expected 7 comma-separated fields");
            try {
                CellKey key{fields[0], fields[1], std::stoi(fields[2]), fields[3]};
                long long correct = std::stoll(fields[4]);
                long long total = std::stoll(fields[5]);
                double stated = std::stod(fields[6]);
                Cell cell{correct, total};
                if (std::abs(stated - cell.accuracy()) > 1e-6)
                    throw SchemaError(path, line_no, "accuracy",
                                      "stated accuracy disagrees with correct/total");
                table.add_cell(key, correct, total);
            } catch (const std::invalid_argument&) {
                throw SchemaError(path, line_no, "", "malformed numeric field");
            } catch (const DataError& e) {
                if (dynamic_cast<const SchemaError*>(&e)) throw;
                throw SchemaError(path, line_no, "", e.what());
            }
        }
        return table;
    }

    nlohmann::json to_json() const {
        nlohmann::json cells = nlohmann::json::array();
        for (const auto& [key, cell] : cells_)
            cells.push_back({{"dataset", key.dataset},
                             {"relation", key.relation},
                             {"prompt_index", key.prompt_index},
                             {"model", key.model},
                             {"correct", cell.correct},
                             {"total", cell.total},
                             {"accuracy", cell.accuracy()}});
        return nlohmann::json{{"schema_version", 1}, {"cells", std::move(cells)}};
    }

    void save_json(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw CacheIoError("cannot write " + path);
        out << to_json().dump(2) << "\n";
    }

    static AccuracyTable from_json(const nlohmann::json& j, const std::string& path) {
        AccuracyTable table;
        try {
            for (const auto& cj : j.at("cells")) {
                CellKey key{cj.at("dataset").get<std::string>(),
                            cj.at("relation").get<std::string>(),
                            cj.at("prompt_index").get<int>(),
                            cj.at("model").get<std::string>()};
                table.add_cell(key, cj.at("correct").get<long long>(),
                               cj.at("total").get<long long>());
            }
        } catch (const nlohmann::json::exception& e) {
            throw SchemaError(path, 0, "", e.what());
        }
        return table;
    }

    static AccuracyTable load_json(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw FileNotFoundError(path);
        nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_discarded()) throw SchemaError(path, 0, "", "invalid JSON");
        return from_json(j, path);
    }

private:
    std::map<CellKey, Cell> cells_;
};

// ---- Optimal prompt and POPM ---------------------------------------------------

/// Highest-accuracy prompt index for one (dataset, relation, model); ties go
/// to the lowest index. Comparison is exact (cross-multiplied counts).
inline int optimal_prompt(const AccuracyTable& table, const std::string& dataset,
                          const std::string& relation, const std::string& model) {
    int best_index = -1;
    long long best_correct = 0, best_total = 1;
    for (const auto& [key, cell] : table.cells()) {
        if (key.dataset != dataset || key.relation != relation || key.model != model)
            continue;
        bool better;
        if (best_index < 0) {
            better = true;
        } else {
            __int128 lhs = static_cast<__int128>(cell.correct) * best_total;
            __int128 rhs = static_cast<__int128>(best_correct) * cell.total;
            better = lhs > rhs;  // strict: equal accuracy keeps the earlier (lower) index
        }
        if (better) {
            best_index = key.prompt_index;
            best_correct = cell.correct;
            best_total = cell.total;
        }
    }
    if (best_index < 0)
        throw MissingCellError(dataset + "/" + relation + "/" + model +
                               " has no prompt cells");
    return best_index;
}

struct PopmRelationDetail {
    std::string relation;
    int optimal_x = 0;
    int optimal_y = 0;
    bool matched = false;
};

struct PopmReport {
    std::string model_x;
    std::string model_y;
    std::string dataset;
    long long matched = 0;
    long long total = 0;
    std::vector<PopmRelationDetail> per_relation_detail;

    double popm() const {
        return total == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(total);
    }
    std::string popm_percent() const { return format_percent(matched, total, 1); }
};

/// Fraction of relations on which two models share the same optimal prompt.
inline PopmReport popm(const AccuracyTable& table, const std::string& model_x,
                       const std::string& model_y, const std::string& dataset) {
    std::vector<std::string> rel_x = table.relations(dataset, model_x);
    std::vector<std::string> rel_y = table.relations(dataset, model_y);
    if (rel_x != rel_y) {
        std::vector<std::string> uncovered;
        std::set_symmetric_difference(rel_x.begin(), rel_x.end(), rel_y.begin(), rel_y.end(),
                                      std::back_inserter(uncovered));
        std::string msg = "models " + model_x + " and " + model_y +
                          " cover different relations on " + dataset + ":";
        for (const auto& r : uncovered) msg += " " + r;
        if (rel_x.empty() || rel_y.empty())
            msg += rel_x.empty() ? " (no cells for " + model_x + ")"
                                 : " (no cells for " + model_y + ")";
        throw CoverageMismatchError(msg, uncovered);
    }
    if (rel_x.empty())
        throw CoverageMismatchError("no relations for " + model_x + " and " + model_y +
                                    " on " + dataset);

    PopmReport report;
    report.model_x = model_x;
    report.model_y = model_y;
    report.dataset = dataset;
    report.total = static_cast<long long>(rel_x.size());
    for (const std::string& relation : rel_x) {
        PopmRelationDetail detail;
        detail.relation = relation;
        detail.optimal_x = optimal_prompt(table, dataset, relation, model_x);
        detail.optimal_y = optimal_prompt(table, dataset, relation, model_y);
        detail.matched = detail.optimal_x == detail.optimal_y;
        if (detail.matched) ++report.matched;
        report.per_relation_detail.push_back(std::move(detail));
    }
    return report;
}

// ---- RRoP ----------------------------------------------------------------------

struct RropReport {
    double selected_accuracy = 0.0;  // Acc(pt_S)
    double oracle_accuracy = 0.0;    // Acc(pt_O)
    double rrop = 0.0;
    std::string selector_model;
    std::string target_model;
};

/// Recovery Rate of Performance: how much of the oracle prompt's accuracy the
/// cheaply-selected prompt retains. May exceed 1 when the selected prompt
/// generalizes better to test than the oracle did; not clamped.
inline double rrop(double selected, double oracle) {
    if (oracle <= 0.0) throw ZeroOracleError();
    return selected / oracle;
}

// ---- Baselines -------------------------------------------------------------------

struct BaselineReport {
    double first_generated = 0.0;  // accuracy of prompt index 0
    double average = 0.0;          // mean over candidate prompts
    std::optional<double> manual;  // manually-written prompt, when evaluated
    double oracle = 0.0;           // per-relation best prompt
};

/// Macro-averaged (per-relation) baselines for one model on one dataset.
/// `manual_table`, when given, holds the separately-evaluated manual prompts;
/// each relation contributes its lowest-indexed manual cell.
inline BaselineReport baselines(const AccuracyTable& table, const std::string& dataset,
                                const std::string& model,
                                const AccuracyTable* manual_table = nullptr) {
    std::vector<std::string> rels = table.relations(dataset, model);
    if (rels.empty())
        throw MissingCellError("no cells for " + model + " on " + dataset);

    BaselineReport report;
    double manual_sum = 0.0;
    bool manual_all = manual_table != nullptr;
    for (const std::string& relation : rels) {
        std::vector<int> prompts = table.prompt_indices(dataset, relation, model);
        const Cell& first = table.at({dataset, relation, 0, model});
        report.first_generated += first.accuracy();

        double sum = 0.0, best = 0.0;
        for (int p : prompts) {
            double acc = table.at({dataset, relation, p, model}).accuracy();
            sum += acc;
            best = std::max(best, acc);
        }
        report.average += sum / static_cast<double>(prompts.size());
        report.oracle += best;

        if (manual_all) {
            std::vector<int> manual_prompts =
                manual_table->prompt_indices(dataset, relation, model);
            if (manual_prompts.empty()) {
                manual_all = false;
            } else {
                manual_sum +=
                    manual_table->at({dataset, relation, manual_prompts.front(), model})
                        .accuracy();
            }
        }
    }
    double n = static_cast<double>(rels.size());
    report.first_generated /= n;
    report.average /= n;
    report.oracle /= n;
    if (manual_all) report.manual = manual_sum / n;
    return report;
}

// ---- Eval summaries (artifacts consumed by reports) -------------------------------

struct EvalSummary {
    std::string dataset;
    std::string relation;
    std::string model;
    int prompt_index = 0;
    std::string role;  // "selected" or "oracle"
    long long correct = 0;
    long long total = 0;

    double accuracy() const {
        return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
    }
};

inline nlohmann::json to_json(const EvalSummary& s) {
    return nlohmann::json{{"schema_version", 1},
                          {"dataset", s.dataset},
                          {"relation", s.relation},
                          {"model", s.model},
                          {"prompt_index", s.prompt_index},
                          {"role", s.role},
                          {"correct", s.correct},
                          {"total", s.total},
                          {"accuracy", s.accuracy()}};
}

inline EvalSummary eval_summary_from_json(const nlohmann::json& j, const std::string& path) {
    EvalSummary s;
    try {
        s.dataset = j.at("dataset").get<std::string>();
        s.relation = j.value("relation", std::string{});
        s.model = j.at("model").get<std::string>();
        s.prompt_index = j.value("prompt_index", 0);
        s.role = j.value("role", std::string{});
        s.correct = j.at("correct").get<long long>();
        s.total = j.at("total").get<long long>();
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(path, 0, "", e.what());
    }
    if (s.total <= 0 || s.correct < 0 || s.correct > s.total)
        throw SchemaError(path, 0, "correct", "counts must satisfy 0 <= correct <= total");
    return s;
}

inline EvalSummary load_eval_summary(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileNotFoundError(path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw SchemaError(path, 0, "", "invalid JSON");
    return eval_summary_from_json(j, path);
}

inline void save_eval_summary(const EvalSummary& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw CacheIoError("cannot write " + path);
    out << to_json(s).dump(2) << "\n";
}

struct RropRow {
    std::string dataset;
    double selected = 0.0;
    double oracle = 0.0;
    double ratio = 0.0;
};

/// Pairs selected-prompt and oracle-prompt eval summaries by dataset
/// (macro-averaging over relations within each) and computes RRoP per
/// dataset.
inline std::vector<RropRow> rrop_rows(const std::vector<EvalSummary>& selected,
                                      const std::vector<EvalSummary>& oracle) {
    auto by_dataset = [](const std::vector<EvalSummary>& summaries) {
        std::map<std::string, std::pair<double, int>> acc;
        for (const auto& s : summaries) {
            acc[s.dataset].first += s.accuracy();
            acc[s.dataset].second += 1;
        }
        std::map<std::string, double> out;
        for (const auto& [dataset, pair] : acc)
            out[dataset] = pair.first / static_cast<double>(pair.second);
        return out;
    };
    std::map<std::string, double> sel = by_dataset(selected);
    std::map<std::string, double> ora = by_dataset(oracle);

    std::vector<RropRow> rows;
    for (const auto& [dataset, sel_acc] : sel) {
        auto it = ora.find(dataset);
        if (it == ora.end())
            throw CoverageMismatchError("no oracle summary for dataset " + dataset,
                                        {dataset});
        RropRow row;
        row.dataset = dataset;
        row.selected = sel_acc;
        row.oracle = it->second;
        row.ratio = rrop(sel_acc, it->second);
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---- Rendering ----------------------------------------------------------------------

inline std::string render_popm_markdown(const std::vector<PopmReport>& reports,
                                        const std::string& reference) {
    std::string out = "| model | dataset | matched | total | POPM vs " + reference + " |\n";
    out += "|---|---|---:|---:|---:|\n";
    for (const auto& r : reports)
        out += "| " + r.model_x + " | " + r.dataset + " | " + std::to_string(r.matched) +
               " | " + std::to_string(r.total) + " | " + r.popm_percent() + " |\n";
    return out;
}

inline std::string render_popm_csv(const std::vector<PopmReport>& reports) {
    std::string out = "model,dataset,matched,total,popm\n";
    for (const auto& r : reports)
        out += r.model_x + "," + r.dataset + "," + std::to_string(r.matched) + "," +
               std::to_string(r.total) + "," + r.popm_percent() + "\n";
    return out;
}

inline nlohmann::json popm_reports_to_json(const std::vector<PopmReport>& reports,
                                           const std::string& reference) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : reports) {
        nlohmann::json detail = nlohmann::json::array();
        for (const auto& d : r.per_relation_detail)
            detail.push_back({{"relation", d.relation},
                              {"optimal_x", d.optimal_x},
                              {"optimal_y", d.optimal_y},
                              {"matched", d.matched}});
        rows.push_back({{"model", r.model_x},
                        {"reference", r.model_y},
                        {"dataset", r.dataset},
                        {"matched", r.matched},
                        {"total", r.total},
                        {"popm", r.popm()},
                        {"per_relation_detail", std::move(detail)}});
    }
    return nlohmann::json{{"schema_version", 1},
                          {"reference", reference},
                          {"reports", std::move(rows)}};
}

inline std::string render_rrop_markdown(const std::vector<RropRow>& rows) {
    std::string out = "| dataset | Acc(pt_S) | Acc(pt_O) | RRoP |\n|---|---:|---:|---:|\n";
    for (const auto& r : rows)
        out += "| " + r.dataset + " | " + format_fixed(100.0 * r.selected, 2) + " | " +
               format_fixed(100.0 * r.oracle, 2) + " | " + format_fixed(r.ratio, 3) + " |\n";
    return out;
}

inline std::string render_rrop_csv(const std::vector<RropRow>& rows) {
    std::string out = "dataset,selected_accuracy,oracle_accuracy,rrop\n";
    for (const auto& r : rows)
        out += r.dataset + "," + format_fixed(100.0 * r.selected, 2) + "," +
               format_fixed(100.0 * r.oracle, 2) + "," + format_fixed(r.ratio, 3) + "\n";
    return out;
}

inline nlohmann::json rrop_rows_to_json(const std::vector<RropRow>& rows) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : rows)
        out.push_back({{"dataset", r.dataset},
                       {"selected_accuracy", r.selected},
                       {"oracle_accuracy", r.oracle},
                       {"rrop", r.ratio}});
    return nlohmann::json{{"schema_version", 1}, {"rows", std::move(out)}};
}

/// Baseline table in the shape of the headline results: one row per prompt
/// policy, one column per dataset.
inline std::string render_baseline_markdown(
    const std::vector<std::pair<std::string, BaselineReport>>& per_dataset) {
    std::string out = "| prompt policy |";
    for (const auto& [dataset, report] : per_dataset) out += " " + dataset + " |";
    out += "\n|---|";
    for (std::size_t i = 0; i < per_dataset.size(); ++i) out += "---:|";
    out += "\n";

    auto row = [&](const std::string& label, auto getter) {
        out += "| " + label + " |";
        for (const auto& [dataset, report] : per_dataset) {
            std::optional<double> value = getter(report);
            out += value ? " " + format_fixed(100.0 * *value, 2) + " |" : " - |";
        }
        out += "\n";
    };
    row("first-generated", [](const BaselineReport& r) { return std::optional<double>(r.first_generated); });
    row("average", [](const BaselineReport& r) { return std::optional<double>(r.average); });
    row("manual", [](const BaselineReport& r) { return r.manual; });
    row("oracle", [](const BaselineReport& r) { return std::optional<double>(r.oracle); });
    return out;
}

}  // namespace s2lpp

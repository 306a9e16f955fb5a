#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "s2lpp/backends.hpp"
#include "s2lpp/config.hpp"
#include "s2lpp/datasets.hpp"
#include "s2lpp/manifest.hpp"
#include "s2lpp/metrics.hpp"
#include "s2lpp/selection.hpp"
#include "s2lpp/templating.hpp"

namespace s2lpp {

namespace detail {

inline std::vector<std::filesystem::path> collect_json_files(const std::string& path) {
    namespace fs = std::filesystem;
    if (!fs::exists(path)) throw FileNotFoundError(path);
    if (!fs::is_directory(path)) return {fs::path(path)};
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
        std::string name = entry.path().filename().string();
        if (name == "manifest.json" || name == "manifest.partial") continue;
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw FileNotFoundError(path + " contains no .json files");
    return files;
}

inline std::string dataset_id_from_path(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

inline std::string safe_filename(const std::string& name) {
    std::string out = name;
    for (char& c : out)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '-' && c != '_')
            c = '_';
    return out.empty() ? "unnamed" : out;
}

/// Relation ids in first-appearance order with the name seen on the first
/// triple of each.
inline std::vector<std::pair<std::string, std::string>> relations_in_order(
    const std::vector<RelationTriple>& triples) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& t : triples) {
        bool seen = false;
        for (const auto& [id, name] : out)
            if (id == t.relation_id) {
                seen = true;
                break;
            }
        if (!seen) out.emplace_back(t.relation_id, t.relation_name.empty() ? t.relation_id
                                                                           : t.relation_name);
    }
    return out;
}

inline std::vector<RelationTriple> triples_for_relation(
    const std::vector<RelationTriple>& triples, const std::string& relation_id) {
    std::vector<RelationTriple> out;
    for (const auto& t : triples)
        if (t.relation_id == relation_id) out.push_back(t);
    return out;
}

inline void stamp_client_counters(RunManifest& manifest, const Client& client,
                                  const std::vector<std::string>& endpoint_ids) {
    nlohmann::json counters = nlohmann::json::object();
    std::uint64_t transport_total = 0;
    for (const std::string& id : endpoint_ids) {
        CounterSnapshot s = client.counters(id);
        manifest.cache_hits += s.cache_hits;
        manifest.cache_misses += s.cache_misses;
        transport_total += s.transport_calls;
        counters[id] = {{"transport_calls", s.transport_calls},
                        {"cache_hits", s.cache_hits},
                        {"cache_misses", s.cache_misses},
                        {"coalesced", s.coalesced},
                        {"peak_in_flight", s.peak_in_flight}};
    }
    manifest.extra["endpoint_counters"] = std::move(counters);
    manifest.extra["transport_calls_total"] = transport_total;
}

inline RunManifest start_manifest(const std::string& command,
                                  const std::vector<std::string>& args,
                                  const Config& config, const std::string& config_path,
                                  const std::vector<std::string>& input_paths,
                                  const std::vector<std::string>& endpoint_ids) {
    RunManifest m;
    m.command = command;
    m.args = args;
    m.config_digest = config_path.empty() ? "" : sha256_file_hex(config_path);
    for (const std::string& p : input_paths) m.input_digests[p] = sha256_file_hex(p);
    m.endpoint_ids = endpoint_ids;
    m.seed = config.seed;
    return m;
}

}  // namespace detail

inline Client make_client(const Config& config) {
    ClientOptions options;
    options.endpoints = config.endpoints;
    options.cache_dir = config.cache_dir;
    return Client(std::move(options));
}

// ---- gen-prompts ---------------------------------------------------------------

struct GenPromptsOptions {
    std::string task = "qa";
    std::string relations_path;  // dataset whose relations need candidates
    std::string generator;       // endpoint id
    int n = 0;                   // 0 → config.n_candidates
    std::string out_dir;
    std::vector<std::string> cli_args;  // verbatim flags, for the manifest
};

/// Generates one candidate-set file per relation in the dataset.
inline RunManifest cmd_gen_prompts(const Config& config, const std::string& config_path,
                                   const GenPromptsOptions& opts) {
    Task task = task_from_string(opts.task);
    int n = opts.n > 0 ? opts.n : config.n_candidates;
    Client client = make_client(config);
    if (!client.has_endpoint(opts.generator)) throw EndpointUnknownError(opts.generator);

    RunManifest manifest = detail::start_manifest(
        "gen-prompts", opts.cli_args, config, config_path, {opts.relations_path},
        {opts.generator});
    manifest.model_names[opts.generator] = client.endpoint(opts.generator).model_name;
    std::filesystem::path out_dir(opts.out_dir);
    begin_manifest(out_dir, manifest);

    std::vector<std::pair<std::string, std::string>> relations;
    if (task == Task::qa) {
        relations = detail::relations_in_order(load_relation_triples(opts.relations_path));
        if (relations.empty()) throw EmptyInputError("dataset has no relations");
    } else {
        load_entailment_pairs(opts.relations_path);  // validates the file
        relations.emplace_back("entailment", "entailment");
    }

    for (const auto& [relation_id, relation_name] : relations) {
        CandidateSet set =
            generate_candidates(client, opts.generator, relation_name, n, task, relation_id);
        std::string filename = detail::safe_filename(relation_id) + ".candidates.json";
        save_candidates(set, (out_dir / filename).string());
        manifest.artifacts.push_back(filename);
    }

    detail::stamp_client_counters(manifest, client, {opts.generator});
    finalize_manifest(out_dir, manifest);
    return manifest;
}

// ---- select ----------------------------------------------------------------------

struct SelectOptions {
    std::string candidates;  // candidate-set file or directory of them
    std::string dataset;
    std::string selector;  // endpoint id
    int dev_size = 0;      // 0 → config.dev_size
    std::string out_dir;
    std::vector<std::string> cli_args;
};

/// Scores every candidate on the dev split with the selection model and
/// writes one SelectionResult per relation. Results are written as each
/// relation completes, so an aborted run keeps its finished selections (and
/// its manifest.partial marker).
inline RunManifest cmd_select(const Config& config, const std::string& config_path,
                              const SelectOptions& opts) {
    int dev_size = opts.dev_size > 0 ? opts.dev_size : config.dev_size;
    Client client = make_client(config);
    if (!client.has_endpoint(opts.selector)) throw EndpointUnknownError(opts.selector);

    std::vector<std::filesystem::path> candidate_files =
        detail::collect_json_files(opts.candidates);
    std::vector<std::string> inputs{opts.dataset};
    for (const auto& p : candidate_files) inputs.push_back(p.string());

    RunManifest manifest = detail::start_manifest("select", opts.cli_args, config,
                                                  config_path, inputs, {opts.selector});
    manifest.model_names[opts.selector] = client.endpoint(opts.selector).model_name;
    std::filesystem::path out_dir(opts.out_dir);
    begin_manifest(out_dir, manifest);

    SplitSpec split_spec;
    split_spec.dev_size = static_cast<std::size_t>(dev_size);

    std::vector<RelationTriple> triples;
    std::vector<EntailmentPair> pairs;
    for (const auto& file : candidate_files) {
        CandidateSet candidates = load_candidates(file.string());
        SelectionResult result;
        if (candidates.task == Task::qa) {
            if (triples.empty()) triples = load_relation_triples(opts.dataset);
            std::vector<RelationTriple> subset =
                detail::triples_for_relation(triples, candidates.relation_id);
            if (subset.empty())
                throw DataError("dataset has no triples for relation '" +
                                candidates.relation_id + "'");
            SplitResult<RelationTriple> split_result = split(subset, split_spec);
            result = select_prompt<RelationTriple>(client, candidates, split_result.dev,
                                                   opts.selector);
        } else {
            if (pairs.empty()) pairs = load_entailment_pairs(opts.dataset);
            SplitResult<EntailmentPair> split_result = split(pairs, split_spec);
            result = select_prompt<EntailmentPair>(client, candidates, split_result.dev,
                                                   opts.selector);
        }
        std::string filename =
            detail::safe_filename(candidates.relation_id) + ".selection.json";
        save_selection(result, (out_dir / filename).string());
        manifest.artifacts.push_back(filename);
    }

    detail::stamp_client_counters(manifest, client, {opts.selector});
    finalize_manifest(out_dir, manifest);
    return manifest;
}

// ---- eval ------------------------------------------------------------------------

struct EvalOptions {
    std::string selection;  // selection file or directory
    std::string dataset;
    std::string target;  // endpoint id
    std::string role = "selected";  // labels the summaries for cmd_report
    std::string out_dir;
    std::vector<std::string> cli_args;
};

namespace detail {

inline nlohmann::json judgement_line(const RelationTriple& sample,
                                     const ScoredSample<RelationTriple>& scored) {
    return nlohmann::json{{"subject", sample.subject},
                          {"gold_object", sample.object},
                          {"response", scored.response},
                          {"correct", scored.judgement.correct},
                          {"matched_on", std::string(to_string(scored.judgement.matched_on))}};
}

inline nlohmann::json judgement_line(const EntailmentPair& sample,
                                     const ScoredSample<EntailmentPair>& scored) {
    return nlohmann::json{{"premise", sample.premise},
                          {"hypothesis", sample.hypothesis},
                          {"label", sample.label},
                          {"response", scored.response},
                          {"correct", scored.judgement.correct},
                          {"matched_on", std::string(to_string(scored.judgement.matched_on))}};
}

template <typename Sample>
EvalSummary write_eval_artifacts(const std::vector<ScoredSample<Sample>>& scored,
                                 const SelectionResult& selection,
                                 const EvalOptions& opts,
                                 const std::filesystem::path& out_dir,
                                 RunManifest& manifest) {
    std::string base = safe_filename(selection.relation_id.empty() ? "entailment"
                                                                   : selection.relation_id);
    std::string judgements_name = base + ".judgements.jsonl";
    std::ofstream judgements(out_dir / judgements_name);
    if (!judgements)
        throw CacheIoError("cannot write " + (out_dir / judgements_name).string());
    long long correct = 0;
    for (const auto& s : scored) {
        judgements << judgement_line(s.sample, s).dump() << "\n";
        if (s.judgement.correct) ++correct;
    }
    manifest.artifacts.push_back(judgements_name);

    EvalSummary summary;
    summary.dataset = dataset_id_from_path(opts.dataset);
    summary.relation = selection.relation_id;
    summary.model = opts.target;
    summary.prompt_index = selection.selected_index;
    summary.role = opts.role;
    summary.correct = correct;
    summary.total = static_cast<long long>(scored.size());
    std::string summary_name = base + ".summary.json";
    save_eval_summary(summary, (out_dir / summary_name).string());
    manifest.artifacts.push_back(summary_name);
    return summary;
}

}  // namespace detail

/// Evaluates each selection's prompt on the held-out test split (everything
/// after the dev prefix the selection was made on) with the target model.
inline RunManifest cmd_eval(const Config& config, const std::string& config_path,
                            const EvalOptions& opts) {
    Client client = make_client(config);
    if (!client.has_endpoint(opts.target)) throw EndpointUnknownError(opts.target);

    std::vector<std::filesystem::path> selection_files =
        detail::collect_json_files(opts.selection);
    std::vector<std::string> inputs{opts.dataset};
    for (const auto& p : selection_files) inputs.push_back(p.string());

    RunManifest manifest = detail::start_manifest("eval", opts.cli_args, config, config_path,
                                                  inputs, {opts.target});
    manifest.model_names[opts.target] = client.endpoint(opts.target).model_name;
    std::filesystem::path out_dir(opts.out_dir);
    begin_manifest(out_dir, manifest);

    std::vector<RelationTriple> triples;
    std::vector<EntailmentPair> pairs;
    for (const auto& file : selection_files) {
        SelectionResult selection = load_selection(file.string());
        SplitSpec split_spec;
        split_spec.dev_size = static_cast<std::size_t>(selection.dev_sample_count);

        if (selection.task == Task::qa) {
            if (triples.empty()) triples = load_relation_triples(opts.dataset);
            std::vector<RelationTriple> subset =
                detail::triples_for_relation(triples, selection.relation_id);
            SplitResult<RelationTriple> split_result = split(subset, split_spec);
            if (split_result.test.empty())
                throw EmptyInputError("no test samples left for relation '" +
                                      selection.relation_id + "' after the dev split");
            auto scored = answer_with_target<RelationTriple>(client, selection,
                                                             split_result.test, opts.target);
            detail::write_eval_artifacts(scored, selection, opts, out_dir, manifest);
        } else {
            if (pairs.empty()) pairs = load_entailment_pairs(opts.dataset);
            SplitResult<EntailmentPair> split_result = split(pairs, split_spec);
            if (split_result.test.empty())
                throw EmptyInputError("no test samples left after the dev split");
            auto scored = answer_with_target<EntailmentPair>(client, selection,
                                                             split_result.test, opts.target);
            detail::write_eval_artifacts(scored, selection, opts, out_dir, manifest);
        }
    }

    detail::stamp_client_counters(manifest, client, {opts.target});
    finalize_manifest(out_dir, manifest);
    return manifest;
}

// ---- report ------------------------------------------------------------------------

struct ReportOptions {
    std::vector<std::string> eval_paths;    // selected-prompt summaries (files or dirs)
    std::vector<std::string> oracle_paths;  // oracle-prompt summaries
    std::string format = "md";              // md | csv | json
    std::string out;                        // empty → caller prints the return value
};

namespace detail {

inline std::vector<EvalSummary> load_summaries(const std::vector<std::string>& paths) {
    std::vector<EvalSummary> out;
    for (const std::string& path : paths)
        for (const auto& file : collect_json_files(path)) {
            if (file.filename().string().ends_with(".selection.json") ||
                file.filename().string().ends_with(".candidates.json"))
                continue;
            out.push_back(load_eval_summary(file.string()));
        }
    if (out.empty()) throw EmptyInputError("no eval summaries found");
    return out;
}

}  // namespace detail

/// Renders the recovery table (Acc(pt_S), Acc(pt_O), RRoP per dataset).
inline std::string cmd_report(const ReportOptions& opts) {
    if (opts.format != "md" && opts.format != "csv" && opts.format != "json")
        throw UsageError("unknown report format '" + opts.format + "'");
    std::vector<EvalSummary> selected = detail::load_summaries(opts.eval_paths);
    std::vector<EvalSummary> oracle = detail::load_summaries(opts.oracle_paths);
    std::vector<RropRow> rows = rrop_rows(selected, oracle);

    std::string rendered;
    if (opts.format == "md")
        rendered = render_rrop_markdown(rows);
    else if (opts.format == "csv")
        rendered = render_rrop_csv(rows);
    else
        rendered = rrop_rows_to_json(rows).dump(2) + "\n";

    if (!opts.out.empty()) {
        std::ofstream out(opts.out);
        if (!out) throw CacheIoError("cannot write " + opts.out);
        out << rendered;
    }
    return rendered;
}

// ---- consistency ---------------------------------------------------------------------

struct ConsistencyOptions {
    std::vector<std::string> tables;  // accuracy-table CSV paths
    std::string reference;            // model every other model is compared against
    std::string out_dir;
    std::vector<std::string> cli_args;
};

/// Computes the optimal-prompt match rate of every model against the
/// reference, per dataset, and writes the matrix as CSV, markdown, and JSON.
inline std::vector<PopmReport> cmd_consistency(const ConsistencyOptions& opts,
                                               RunManifest* manifest_out = nullptr) {
    if (opts.tables.empty()) throw UsageError("at least one --tables path is required");
    AccuracyTable table;
    for (const std::string& path : opts.tables) table.merge(AccuracyTable::load_csv(path));

    std::vector<PopmReport> reports;
    for (const std::string& dataset : table.datasets()) {
        std::vector<std::string> models = table.models(dataset);
        if (std::find(models.begin(), models.end(), opts.reference) == models.end()) {
            std::string found;
            for (const auto& m : models) found += (found.empty() ? "" : ", ") + m;
            throw CoverageMismatchError("reference model '" + opts.reference +
                                            "' has no cells for dataset '" + dataset +
                                            "'; models found: " + found,
                                        models);
        }
        for (const std::string& model : models) {
            if (model == opts.reference) continue;
            reports.push_back(popm(table, model, opts.reference, dataset));
        }
    }

    RunManifest manifest;
    manifest.command = "consistency";
    manifest.args = opts.cli_args;
    for (const std::string& path : opts.tables)
        manifest.input_digests[path] = sha256_file_hex(path);
    std::filesystem::path out_dir(opts.out_dir);
    begin_manifest(out_dir, manifest);

    {
        std::ofstream csv(out_dir / "popm.csv");
        if (!csv) throw CacheIoError("cannot write " + (out_dir / "popm.csv").string());
        csv << render_popm_csv(reports);
    }
    {
        std::ofstream md(out_dir / "popm.md");
        if (!md) throw CacheIoError("cannot write " + (out_dir / "popm.md").string());
        md << render_popm_markdown(reports, opts.reference);
    }
    {
        std::ofstream js(out_dir / "popm.json");
        if (!js) throw CacheIoError("cannot write " + (out_dir / "popm.json").string());
        js << popm_reports_to_json(reports, opts.reference).dump(2) << "\n";
    }
    manifest.artifacts = {"popm.csv", "popm.md", "popm.json"};
    finalize_manifest(out_dir, manifest);
    if (manifest_out) *manifest_out = manifest;
    return reports;
}

// ---- cache gc ------------------------------------------------------------------------

/// Parses durations like "30d", "12h", "45m", "3600s", or bare seconds.
inline long long parse_duration_seconds(const std::string& text) {
    if (text.empty()) throw UsageError("empty duration");
    std::size_t unit_at = text.size();
    long long scale = 1;
    switch (text.back()) {
        case 'd': scale = 86400; --unit_at; break;
        case 'h': scale = 3600; --unit_at; break;
        case 'm': scale = 60; --unit_at; break;
        case 's': scale = 1; --unit_at; break;
        default: break;
    }
    std::string digits = text.substr(0, unit_at);
    if (digits.empty() ||
        !std::all_of(digits.begin(), digits.end(),
                     [](unsigned char c) { return std::isdigit(c); }))
        throw UsageError("bad duration '" + text + "'; use forms like 30d, 12h, 3600s");
    return std::stoll(digits) * scale;
}

inline std::size_t cmd_cache_gc(const Config& config, const std::string& older_than) {
    if (config.cache_dir.empty())
        throw UsageError("config has no cache_dir; nothing to garbage-collect");
    ResponseCache cache(config.cache_dir);
    return cache.gc_older_than(std::chrono::seconds(parse_duration_seconds(older_than)));
}

}  // namespace s2lpp

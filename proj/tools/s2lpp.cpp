// s2lpp — prompt-selection pipeline driver.
//
// Verbs: gen-prompts, select, eval, report, consistency, cache gc.
// Exit codes: 0 success, 2 usage error, 3 data error, 4 backend error.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "s2lpp/commands.hpp"
#include "s2lpp/config.hpp"
#include "s2lpp/errors.hpp"

namespace {

std::vector<std::string> args_of(int argc, char** argv) {
    return {argv + 1, argv + argc};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Small-to-large prompt prediction pipeline"};
    app.require_subcommand(1);

    std::string config_flag;
    app.add_option("--config", config_flag,
                   "Config file (default: $S2LPP_CONFIG)");

    s2lpp::GenPromptsOptions gen_opts;
    CLI::App* gen = app.add_subcommand("gen-prompts",
                                       "Generate candidate prompts per relation");
    gen->add_option("--task", gen_opts.task, "Task: qa or nli")->default_val("qa");
    gen->add_option("--relations", gen_opts.relations_path,
                    "Dataset file naming the relations")
        ->required();
    gen->add_option("--generator", gen_opts.generator, "Generator endpoint id")->required();
    gen->add_option("--n", gen_opts.n, "Candidates per relation (default from config)");
    gen->add_option("--out", gen_opts.out_dir, "Output directory")->required();

    s2lpp::SelectOptions select_opts;
    CLI::App* select = app.add_subcommand("select",
                                          "Pick the best candidate on a dev split");
    select->add_option("--candidates", select_opts.candidates,
                       "Candidate file or directory")
        ->required();
    select->add_option("--dataset", select_opts.dataset, "Dataset file")->required();
    select->add_option("--selector", select_opts.selector, "Selection endpoint id")
        ->required();
    select->add_option("--dev-size", select_opts.dev_size,
                       "Dev split size (default from config)");
    select->add_option("--out", select_opts.out_dir, "Output directory")->required();

    s2lpp::EvalOptions eval_opts;
    CLI::App* eval = app.add_subcommand("eval",
                                        "Answer the test split with the target model");
    eval->add_option("--selection", eval_opts.selection, "Selection file or directory")
        ->required();
    eval->add_option("--dataset", eval_opts.dataset, "Dataset file")->required();
    eval->add_option("--target", eval_opts.target, "Target endpoint id")->required();
    eval->add_option("--role", eval_opts.role, "Summary label: selected or oracle")
        ->default_val("selected");
    eval->add_option("--out", eval_opts.out_dir, "Output directory")->required();

    s2lpp::ReportOptions report_opts;
    CLI::App* report = app.add_subcommand("report", "Render the RRoP recovery table");
    report->add_option("--eval", report_opts.eval_paths,
                       "Selected-prompt summary files or directories")
        ->required();
    report->add_option("--oracle", report_opts.oracle_paths,
                       "Oracle-prompt summary files or directories")
        ->required();
    report->add_option("--format", report_opts.format, "md, csv, or json")
        ->default_val("md");
    report->add_option("--out", report_opts.out, "Write to file instead of stdout");

    s2lpp::ConsistencyOptions consistency_opts;
    CLI::App* consistency =
        app.add_subcommand("consistency", "Optimal-prompt match rates vs a reference model");
    consistency->add_option("--tables", consistency_opts.tables, "Accuracy-table CSV paths")
        ->required();
    consistency->add_option("--reference", consistency_opts.reference, "Reference model id")
        ->required();
    consistency->add_option("--out", consistency_opts.out_dir, "Output directory")
        ->required();

    CLI::App* cache = app.add_subcommand("cache", "Response-cache maintenance");
    cache->require_subcommand(1);
    std::string older_than;
    CLI::App* gc = cache->add_subcommand("gc", "Drop cache entries older than a cutoff");
    gc->add_option("--older-than", older_than, "Age cutoff, e.g. 30d, 12h, 3600s")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*gen) {
            gen_opts.cli_args = args_of(argc, argv);
            s2lpp::Config config = s2lpp::load_config(s2lpp::resolve_config_path(config_flag));
            s2lpp::RunManifest manifest = s2lpp::cmd_gen_prompts(
                config, s2lpp::resolve_config_path(config_flag), gen_opts);
            std::cout << "wrote " << manifest.artifacts.size() << " candidate set(s) to "
                      << gen_opts.out_dir << " (run " << manifest.run_id << ")\n";
        } else if (*select) {
            select_opts.cli_args = args_of(argc, argv);
            std::string config_path = s2lpp::resolve_config_path(config_flag);
            s2lpp::Config config = s2lpp::load_config(config_path);
            s2lpp::RunManifest manifest = s2lpp::cmd_select(config, config_path, select_opts);
            std::cout << "wrote " << manifest.artifacts.size() << " selection(s) to "
                      << select_opts.out_dir << " (run " << manifest.run_id << ")\n";
        } else if (*eval) {
            eval_opts.cli_args = args_of(argc, argv);
            std::string config_path = s2lpp::resolve_config_path(config_flag);
            s2lpp::Config config = s2lpp::load_config(config_path);
            s2lpp::RunManifest manifest = s2lpp::cmd_eval(config, config_path, eval_opts);
            std::cout << "wrote " << manifest.artifacts.size() << " artifact(s) to "
                      << eval_opts.out_dir << " (run " << manifest.run_id << ")\n";
        } else if (*report) {
            std::string rendered = s2lpp::cmd_report(report_opts);
            if (report_opts.out.empty())
                std::cout << rendered;
            else
                std::cout << "wrote report to " << report_opts.out << "\n";
        } else if (*consistency) {
            consistency_opts.cli_args = args_of(argc, argv);
            std::vector<s2lpp::PopmReport> reports = s2lpp::cmd_consistency(consistency_opts);
            std::cout << s2lpp::render_popm_markdown(reports, consistency_opts.reference);
        } else if (*cache) {
            std::string config_path = s2lpp::resolve_config_path(config_flag);
            s2lpp::Config config = s2lpp::load_config(config_path);
            std::size_t removed = s2lpp::cmd_cache_gc(config, older_than);
            std::cout << "removed " << removed << " cache entrie(s)\n";
        }
    } catch (const s2lpp::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return s2lpp::exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

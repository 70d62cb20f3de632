#include "cohortflow/app/cli.hpp"

#include "cohortflow/app/projection.hpp"
#include "cohortflow/app/service.hpp"

#include <cohortflow/estimation.hpp>
#include <cohortflow/evaluation.hpp>
#include <cohortflow/ingestion.hpp>
#include <cohortflow/serialization.hpp>

#include <CLI11.hpp>
#include <httplib.h>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace cohortflow::app {

namespace {

/// Bad invocation that CLI11 cannot detect on its own; maps to exit 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path, std::string_view what) {
    if (!std::filesystem::is_regular_file(path)) {
        throw UsageError(std::string(what) + " file not found: " + path);
    }
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (!in && !in.eof()) {
        throw UsageError("cannot read " + path);
    }
    return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw UsageError("cannot open output file: " + path);
    }
    out << content;
    if (!out) {
        throw Error("failed writing " + path);
    }
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) {
            items.push_back(item);
        }
    }
    return items;
}

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct FitFlags {
    double alpha = 0.0;
    std::optional<double> decay;
    std::string weights;
    std::string inflow_policy = "mean";
    std::string term_type;
    std::string enrolled;
    std::string absorbing;

    void attach(CLI::App& cmd) {
        cmd.add_option("--alpha", alpha, "Additive smoothing pseudo-count")
            ->check(CLI::NonNegativeNumber);
        auto* decay_opt = cmd.add_option("--decay", decay,
                                         "Exponential pooling decay in (0, 1]; weight = decay^age");
        cmd.add_option("--weights", weights, "Comma-separated pooling weights, oldest pair first")
            ->excludes(decay_opt);
        cmd.add_option("--inflow-policy", inflow_policy, "mean | weighted-mean | last")
            ->check(CLI::IsMember({"mean", "weighted-mean", "last"}));
        cmd.add_option("--term-type", term_type,
                       "Only pool pairs whose from-term label starts with this type (e.g. fall)");
        cmd.add_option("--enrolled", enrolled, "Comma-separated enrolled states (custom space)");
        cmd.add_option("--absorbing", absorbing, "Comma-separated absorbing states (custom space)");
    }

    StateSpace space() const {
        if (enrolled.empty() && absorbing.empty()) {
            return StateSpace::standard();
        }
        if (enrolled.empty() || absorbing.empty()) {
            throw UsageError("--enrolled and --absorbing must be given together");
        }
        auto states = split_list(enrolled);
        const auto terminal = split_list(absorbing);
        states.insert(states.end(), terminal.begin(), terminal.end());
        return StateSpace(states, split_list(enrolled), terminal);
    }

    FitConfig config() const {
        FitConfig cfg;
        cfg.space = space();
        cfg.alpha = alpha;
        cfg.decay = decay;
        if (!weights.empty()) {
            std::vector<double> w;
            for (const auto& item : split_list(weights)) {
                try {
                    w.push_back(std::stod(item));
                } catch (const std::exception&) {
                    throw UsageError("--weights entry is not a number: '" + item + "'");
                }
            }
            cfg.weights = std::move(w);
        }
        cfg.inflow_policy = parse_inflow_policy(inflow_policy);
        if (!term_type.empty()) {
            cfg.term_type_filter = term_type;
        }
        return cfg;
    }
};

struct GenerateCmd {
    std::string model_path;
    std::optional<long> students;
    std::string initial;
    int terms = 8;
    std::uint64_t seed = 0;
    std::string out_path;
    std::string inflow_mode = "fixed";
    std::string label_prefix = "T";

    int run(std::ostream& out) const {
        const TransitionModel model = read_model(read_file(model_path, "model"));
        const StateSpace& space = model.space();

        StateVector initial_counts;
        if (!initial.empty()) {
            initial_counts = StateVector::from_labels(space, parse_label_values(initial));
        } else if (students) {
            // Even split over enrolled states; remainder goes to the earliest ones.
            const auto n = static_cast<std::size_t>(space.enrolled_size());
            std::vector<double> counts(n, static_cast<double>(*students / static_cast<long>(n)));
            for (std::size_t e = 0; e < static_cast<std::size_t>(*students % static_cast<long>(n)); ++e) {
                counts[e] += 1.0;
            }
            initial_counts = StateVector(std::move(counts));
        } else {
            throw UsageError("generate needs --students or --initial");
        }

        SyntheticConfig cfg{model, initial_counts, terms,
                            inflow_mode == "stochastic" ? InflowMode::StochasticRounding
                                                        : InflowMode::FixedPerTerm,
                            seed, label_prefix};
        const auto snapshots = generate_synthetic(cfg);
        write_file(out_path, write_snapshot_csv(snapshots));
        std::size_t rows = 0;
        for (const auto& s : snapshots) {
            rows += s.roster.size();
        }
        out << "wrote " << snapshots.size() << " terms, " << rows << " rows to " << out_path << "\n";
        return kExitOk;
    }
};

struct FitCmd {
    std::string data_path;
    std::string out_path;
    FitFlags flags;

    int run(std::ostream& out) const {
        FitConfig cfg = flags.config();
        cfg.created = utc_now();
        const auto snapshots = parse_snapshot_csv(read_file(data_path, "data"), cfg.space);
        const TransitionModel model = fit(snapshots, cfg);
        write_file(out_path, write_model(model));

        const ModelMeta& meta = model.meta();
        out << "states:";
        for (const auto& s : model.space().states()) {
            out << " " << s;
        }
        out << "\nterm pairs used: " << meta.term_pairs.size() << "\n";
        for (std::size_t k = 0; k < meta.term_pairs.size(); ++k) {
            out << "  " << meta.term_pairs[k].from.label << " -> " << meta.term_pairs[k].to.label
                << "  weight " << format_number(meta.weights[k]) << "\n";
        }
        for (const auto& d : meta.diagnostics) {
            out << "diagnostic: " << d << "\n";
        }
        out << "model written to " << out_path << "\n";
        return kExitOk;
    }
};

struct ProjectCmd {
    std::string model_path;
    int horizon = 0;
    std::string initial;
    std::string data_path;
    std::string scenario_path;
    std::string out_path;
    std::string format = "json";

    int run(std::ostream& out) const {
        const TransitionModel model = read_model(read_file(model_path, "model"));
        const StateSpace& space = model.space();

        StateVector v0;
        if (!initial.empty()) {
            v0 = StateVector::from_labels(space, parse_label_values(initial));
        } else if (!data_path.empty()) {
            const auto snapshots = parse_snapshot_csv(read_file(data_path, "data"), space);
            if (snapshots.empty()) {
                throw Error("data file has no snapshots: " + data_path);
            }
            v0 = enrolled_headcount(snapshots.back(), space);
        } else if (!model.meta().last_counts.empty()) {
            v0 = initial_from_model(model);
        } else {
            throw UsageError("project needs --initial or --from-data (the model has no stored counts)");
        }

        std::optional<ScenarioSpec> scenario;
        if (!scenario_path.empty()) {
            const std::string text = read_file(scenario_path, "scenario");
            Json doc;
            try {
                doc = Json::parse(text);
            } catch (const Json::parse_error& e) {
                throw ParseError(std::string("scenario is not valid JSON: ") + e.what());
            }
            scenario = scenario_from_json(doc, horizon);
        }

        const Json document = projection_document(model, v0, horizon, scenario);
        std::string rendered;
        if (format == "csv") {
            rendered = render_csv(document, space, v0, model, scenario);
        } else {
            rendered = document.dump(2) + "\n";
        }
        if (out_path.empty()) {
            out << rendered;
        } else {
            write_file(out_path, rendered);
        }
        return kExitOk;
    }

private:
    std::string render_csv(const Json&, const StateSpace& space, const StateVector& v0,
                           const TransitionModel& model,
                           const std::optional<ScenarioSpec>& scenario) const {
        const std::string baseline = trajectory_to_csv(project(v0, model, horizon), space);
        if (!scenario) {
            return baseline;
        }
        ScenarioSpec spec = *scenario;
        spec.horizon = horizon;
        const std::string what_if =
            trajectory_to_csv(project(v0, apply_scenario(model, spec), horizon), space);
        // Prefix a series column so both trajectories share one table.
        auto tag = [](const std::string& csv, const std::string& series, bool keep_header) {
            std::istringstream in(csv);
            std::string line;
            std::string result;
            bool header = true;
            while (std::getline(in, line)) {
                if (header) {
                    header = false;
                    if (keep_header) {
                        result += "series," + line + "\n";
                    }
                    continue;
                }
                result += series + "," + line + "\n";
            }
            return result;
        };
        return tag(baseline, "baseline", true) + tag(what_if, "scenario", false);
    }
};

struct BacktestCmd {
    std::string data_path;
    int train_through = 0;
    int horizon = 0;
    std::string model_path;
    bool include_stopout = false;
    bool per_state = false;
    std::string out_path;
    FitFlags flags;

    int run(std::ostream& out) const {
        BacktestConfig cfg;
        cfg.horizon = horizon;
        cfg.include_stopout = include_stopout;
        cfg.per_state = per_state;
        StateSpace space = StateSpace::standard();
        if (!model_path.empty()) {
            cfg.model = read_model(read_file(model_path, "model"));
            space = cfg.model->space();
        } else {
            cfg.fit = flags.config();
            space = cfg.fit.space;
        }
        const auto snapshots = parse_snapshot_csv(read_file(data_path, "data"), space);
        const EvaluationReport report = backtest(snapshots, train_through, cfg);

        out << format_report_table(report);
        if (per_state) {
            for (const auto& row : report.rows) {
                out << row.period << ":";
                for (const auto& [label, pa] : row.per_state) {
                    out << " " << label << " " << format_number(pa.first) << "/"
                        << format_number(pa.second);
                }
                out << "\n";
            }
        }
        if (!out_path.empty()) {
            write_file(out_path, report_to_json(report).dump(2) + "\n");
        }
        return kExitOk;
    }
};

struct ServeCmd {
    std::string model_path;
    std::optional<int> port;
    std::string host = "127.0.0.1";
    std::string static_dir;

    int run(std::ostream& out, std::ostream& err) const {
        const TransitionModel model = read_model(read_file(model_path, "model"));
        const int resolved_port = resolve_port(port);
        std::optional<std::filesystem::path> assets;
        if (!static_dir.empty()) {
            if (!std::filesystem::is_directory(static_dir)) {
                throw UsageError("static directory not found: " + static_dir);
            }
            assets = static_dir;
        }

        const ProjectionService service(model);
        httplib::Server server;
        mount_routes(server, service, assets);
        if (!server.bind_to_port(host, resolved_port)) {
            err << "error: cannot bind " << host << ":" << resolved_port
                << " (port busy or unavailable)\n";
            return kExitFailure;
        }
        out << "serving on http://" << host << ":" << resolved_port << "\n" << std::flush;
        server.listen_after_bind();
        return kExitOk;
    }
};

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Cohort projection with row-stochastic transition models"};
    app.set_version_flag("--version", COHORTFLOW_VERSION);
    app.require_subcommand(1);

    GenerateCmd generate;
    auto* gen = app.add_subcommand("generate", "Write a seeded synthetic snapshot CSV from a model");
    gen->add_option("--model", generate.model_path, "Model JSON")->required();
    gen->add_option("--students", generate.students, "Initial students, split evenly over enrolled states")
        ->check(CLI::NonNegativeNumber);
    gen->add_option("--initial", generate.initial, "Initial counts as label=n,label=n");
    gen->add_option("--terms", generate.terms, "Number of terms to simulate")
        ->check(CLI::Range(2, 100000));
    gen->add_option("--seed", generate.seed, "64-bit seed");
    gen->add_option("--out", generate.out_path, "Output CSV")->required();
    gen->add_option("--inflow-mode", generate.inflow_mode, "fixed | stochastic")
        ->check(CLI::IsMember({"fixed", "stochastic"}));
    gen->add_option("--label-prefix", generate.label_prefix, "Term label prefix");

    FitCmd fit_cmd;
    auto* fit_app = app.add_subcommand("fit", "Estimate a transition model from snapshot CSV");
    fit_app->add_option("--data", fit_cmd.data_path, "Snapshot CSV")->required();
    fit_app->add_option("--out", fit_cmd.out_path, "Output model JSON")->required();
    fit_cmd.flags.attach(*fit_app);

    ProjectCmd project_cmd;
    auto* proj = app.add_subcommand("project", "Project headcounts forward, optionally under a scenario");
    proj->add_option("--model", project_cmd.model_path, "Model JSON")->required();
    proj->add_option("--horizon", project_cmd.horizon, "Terms to project")
        ->required()
        ->check(CLI::Range(1, kMaxHorizon));
    auto* initial_opt = proj->add_option("--initial", project_cmd.initial,
                                         "Initial counts as label=n,label=n");
    proj->add_option("--from-data", project_cmd.data_path,
                     "Use the last term of this snapshot CSV as the initial vector")
        ->excludes(initial_opt);
    proj->add_option("--scenario", project_cmd.scenario_path, "Scenario JSON");
    proj->add_option("--out", project_cmd.out_path, "Output file (stdout when omitted)");
    proj->add_option("--format", project_cmd.format, "json | csv")
        ->check(CLI::IsMember({"json", "csv"}));

    BacktestCmd backtest_cmd;
    auto* bt = app.add_subcommand("backtest", "Fit on early terms and score projections on later ones");
    bt->add_option("--data", backtest_cmd.data_path, "Snapshot CSV")->required();
    bt->add_option("--train-through", backtest_cmd.train_through, "Last training term index")
        ->required();
    bt->add_option("--horizon", backtest_cmd.horizon, "Held-out terms to score")
        ->required()
        ->check(CLI::Range(1, kMaxHorizon));
    bt->add_option("--model", backtest_cmd.model_path, "Score this model instead of fitting");
    bt->add_flag("--include-stopout", backtest_cmd.include_stopout, "Count StopOut as enrolled");
    bt->add_flag("--per-state", backtest_cmd.per_state, "Also report per-state headcounts");
    bt->add_option("--out", backtest_cmd.out_path, "Write the report JSON here");
    backtest_cmd.flags.attach(*bt);

    ServeCmd serve_cmd;
    auto* srv = app.add_subcommand("serve", "Serve the model and projection API over HTTP");
    srv->add_option("--model", serve_cmd.model_path, "Model JSON")->required();
    srv->add_option("--port", serve_cmd.port, "Port (default $COHORTFLOW_PORT or 8080)")
        ->check(CLI::Range(1, 65535));
    srv->add_option("--host", serve_cmd.host, "Bind address");
    srv->add_option("--static-dir", serve_cmd.static_dir, "Directory of UI assets to serve at /");

    std::vector<std::string> argv_storage{"cohortflow"};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_storage) {
        argv.push_back(a.data());
    }

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*gen) {
            return generate.run(out);
        }
        if (*fit_app) {
            return fit_cmd.run(out);
        }
        if (*proj) {
            return project_cmd.run(out);
        }
        if (*bt) {
            return backtest_cmd.run(out);
        }
        if (*srv) {
            return serve_cmd.run(out, err);
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}

} // namespace cohortflow::app

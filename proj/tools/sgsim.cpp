// sgsim — scenario runner for graph-checked 2D/3D detection fusion.
//
// Subcommands mirror the pipeline stages so each one can be run and inspected
// in isolation: generate, attack, graph, check, fuse, run, dataset.

#include "sgsim/errors.hpp"
#include "sgsim/harness.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

using sgsim::Json;

struct GlobalOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format = "json";
    std::optional<double> zeta_min;
    bool strict_predicates = false;
};

sgsim::ScenarioConfig effective_config(const GlobalOptions& opt) {
    if (opt.config_path.empty()) {
        throw sgsim::ConfigError("--config is required for this command");
    }
    sgsim::ScenarioConfig cfg = sgsim::load_config(opt.config_path);
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.zeta_min) {
        for (auto& a : cfg.attacks) a.constraints.zeta_min = *opt.zeta_min;
    }
    if (opt.strict_predicates) cfg.camera_graph.strict_predicates = true;
    return cfg;
}

void emit(const GlobalOptions& opt, const std::string& text) {
    if (opt.out.empty()) {
        std::cout << text;
    } else {
        sgsim::write_text_file(opt.out, text);
    }
}

sgsim::GraphFormat parse_format(const GlobalOptions& opt) {
    if (opt.format == "json") return sgsim::GraphFormat::json;
    if (opt.format == "dot") return sgsim::GraphFormat::dot;
    throw sgsim::ConfigError("--format must be json or dot");
}

struct Bundle {
    sgsim::Scene scene;
    std::vector<sgsim::Detection> camera;
    std::vector<sgsim::Detection> lidar;
};

Bundle load_bundle(const std::string& path) {
    Json doc = sgsim::read_json_file(path);
    Bundle b;
    b.scene = sgsim::scene_from_json(doc.at("scene"));
    b.camera = sgsim::detections_from_json(doc.at("detections").at("camera"));
    b.lidar = sgsim::detections_from_json(doc.at("detections").at("lidar"));
    return b;
}

int run_command(const std::string& cmd, const GlobalOptions& opt,
                const std::string& in_path, const std::string& sensor, bool reduced,
                int count, const std::string& csv_path) {
    if (cmd == "generate") {
        sgsim::ScenarioConfig cfg = effective_config(opt);
        sgsim::TrialRecord t = sgsim::run_trial(cfg, 0, false);
        emit(opt, sgsim::frame_bundle_to_json(t).dump(2) + "\n");
        return 0;
    }
    if (cmd == "attack") {
        sgsim::ScenarioConfig cfg = effective_config(opt);
        sgsim::TrialRecord t = sgsim::run_trial(cfg, 0, true);
        emit(opt, sgsim::frame_bundle_to_json(t).dump(2) + "\n");
        return 0;
    }
    if (cmd == "graph") {
        sgsim::ScenarioConfig cfg = effective_config(opt);
        Bundle b = load_bundle(in_path);
        sgsim::SceneGraph g;
        if (sensor == "lidar") {
            g = sgsim::build_graph_lidar(b.lidar, b.scene.ego, b.scene.camera,
                                         cfg.relations);
        } else if (sensor == "camera") {
            g = sgsim::build_graph_monocular(b.camera, b.scene.camera, cfg.relations,
                                             cfg.scene.priors);
        } else {
            throw sgsim::ConfigError("--sensor must be lidar or camera");
        }
        if (reduced) g = sgsim::reduce_graph(g);
        emit(opt, sgsim::export_graph(g, parse_format(opt)));
        return 0;
    }
    if (cmd == "check") {
        sgsim::ScenarioConfig cfg = effective_config(opt);
        Bundle b = load_bundle(in_path);
        sgsim::SceneGraph g_cam = sgsim::build_graph_monocular(
            b.camera, b.scene.camera, cfg.relations, cfg.scene.priors);
        sgsim::SceneGraph g_lidar =
            sgsim::build_graph_lidar(b.lidar, b.scene.ego, b.scene.camera, cfg.relations);
        sgsim::NodeMatch match =
            sgsim::match_nodes(g_cam, g_lidar, b.camera, b.lidar, b.scene.camera,
                               cfg.match_threshold);
        sgsim::ConsistencyReport report =
            sgsim::cross_check(g_cam, g_lidar, match, sgsim::VocabMap::defaults());
        for (const auto& v : sgsim::check_constraints(g_cam, cfg.kb)) {
            report.violations.push_back(v);
        }
        for (const auto& v : sgsim::check_constraints(g_lidar, cfg.kb)) {
            report.violations.push_back(v);
        }
        sgsim::AttackConstraints hyp_constraints =
            cfg.attacks.empty() ? sgsim::AttackConstraints{}
                                : cfg.attacks.front().constraints;
        report.hypotheses = sgsim::hypothesize_perturbation(
            report, g_cam, g_lidar, b.camera, b.lidar, hyp_constraints,
            cfg.integrity_context());
        if (parse_format(opt) == sgsim::GraphFormat::dot) {
            emit(opt, sgsim::export_graph(g_lidar, sgsim::GraphFormat::dot, &report));
        } else {
            emit(opt, sgsim::consistency_to_json(report).dump(2) + "\n");
        }
        return 0;
    }
    if (cmd == "fuse") {
        sgsim::ScenarioConfig cfg = effective_config(opt);
        Bundle b = load_bundle(in_path);
        sgsim::SceneGraph g_cam = sgsim::build_graph_monocular(
            b.camera, b.scene.camera, cfg.relations, cfg.scene.priors);
        sgsim::SceneGraph g_lidar =
            sgsim::build_graph_lidar(b.lidar, b.scene.ego, b.scene.camera, cfg.relations);
        sgsim::NodeMatch match =
            sgsim::match_nodes(g_cam, g_lidar, b.camera, b.lidar, b.scene.camera,
                               cfg.match_threshold);
        sgsim::ConsistencyReport report =
            sgsim::cross_check(g_cam, g_lidar, match, sgsim::VocabMap::defaults());
        sgsim::Assignment assignment = sgsim::solve_assignment(
            sgsim::build_cost_matrix(b.camera, b.lidar, b.scene.camera),
            cfg.assignment_gate);
        auto fused = sgsim::graph_informed_fuse(assignment, b.camera, b.lidar, report,
                                                b.scene.camera, cfg.scene.priors);
        emit(opt, sgsim::fused_to_json(fused).dump(2) + "\n");
        return 0;
    }
    if (cmd == "run") {
        sgsim::ScenarioConfig cfg = effective_config(opt);
        sgsim::RunReport report = sgsim::run_scenario(cfg);
        emit(opt, sgsim::run_report_to_json(report).dump(2) + "\n");
        if (!csv_path.empty()) {
            sgsim::write_text_file(csv_path, sgsim::metrics_csv(report));
        }
        return 0;
    }
    if (cmd == "dataset") {
        sgsim::ScenarioConfig cfg = effective_config(opt);
        if (opt.out.empty()) throw sgsim::ConfigError("dataset requires --out <dir>");
        Json manifest = sgsim::generate_dataset(cfg, count, opt.out);
        std::cout << "wrote " << manifest["count"] << " records ("
                  << manifest["attacked_count"] << " attacked) to " << opt.out << "\n";
        return 0;
    }
    throw sgsim::ConfigError("unknown command " + cmd);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scene-graph integrity simulator for 2D/3D detection fusion"};
    app.require_subcommand(1);

    GlobalOptions opt;
    std::uint64_t seed_value = 0;
    bool seed_set = false;
    double zeta_value = 0.0;
    bool zeta_set = false;
    app.add_option("--config", opt.config_path, "Scenario config file (JSON)");
    app.add_option("--seed", seed_value, "Override the config seed")
        ->each([&](const std::string&) { seed_set = true; });
    app.add_option("--out", opt.out, "Output path (stdout when omitted)");
    app.add_option("--format", opt.format, "Output format: json or dot")
        ->check(CLI::IsMember({"json", "dot"}));
    app.add_option("--zeta-min", zeta_value, "Override zeta_min for all attacks")
        ->each([&](const std::string&) { zeta_set = true; });
    app.add_flag("--strict-predicates", opt.strict_predicates,
                 "Reject unknown predicates on graph import");

    std::string in_path;
    std::string sensor = "lidar";
    bool reduced = false;
    int count = 1;
    std::string csv_path;

    app.add_subcommand("generate", "Generate a scene and pseudo-detections");
    app.add_subcommand("attack", "Generate and apply the configured attacks");
    auto* graph_cmd = app.add_subcommand("graph", "Build a scene graph from a bundle");
    graph_cmd->add_option("--in", in_path, "Frame bundle file")->required();
    graph_cmd->add_option("--sensor", sensor, "lidar or camera")
        ->check(CLI::IsMember({"lidar", "camera"}));
    graph_cmd->add_flag("--reduced", reduced, "Emit the reduced graph");
    auto* check_cmd = app.add_subcommand("check", "Cross-sensor integrity report");
    check_cmd->add_option("--in", in_path, "Frame bundle file")->required();
    auto* fuse_cmd = app.add_subcommand("fuse", "Graph-informed fusion output");
    fuse_cmd->add_option("--in", in_path, "Frame bundle file")->required();
    auto* run_cmd = app.add_subcommand("run", "Run the configured trials end to end");
    run_cmd->add_option("--csv", csv_path, "Also write the per-trial metrics CSV");
    auto* dataset_cmd = app.add_subcommand("dataset", "Emit a record dataset");
    dataset_cmd->add_option("--count", count, "Number of records")->required();

    CLI11_PARSE(app, argc, argv);
    if (seed_set) opt.seed = seed_value;
    if (zeta_set) opt.zeta_min = zeta_value;

    try {
        std::string cmd = app.get_subcommands().front()->get_name();
        return run_command(cmd, opt, in_path, sensor, reduced, count, csv_path);
    } catch (const sgsim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const sgsim::SchemaViolation& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return 1;
    } catch (const sgsim::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

#pragma once

#include "sgsim/attack.hpp"
#include "sgsim/fusion.hpp"
#include "sgsim/integrity.hpp"
#include "sgsim/scene.hpp"
#include "sgsim/sgg.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sgsim {

using Json = nlohmann::ordered_json;

// One attack entry in a scenario. The target is either an explicit detection
// id or resolved per trial: by class (first lidar detection of that class) or
// by scene object index.
struct AttackConfig {
    AttackKind kind{AttackKind::frustum_translate};
    std::string target_id;
    std::optional<ObjectClass> target_class;
    std::optional<int> target_index;
    std::optional<SpawnParams> spawn;
    AttackConstraints constraints{};
};

struct CameraGraphConfig {
    enum class Source { monocular, import_files };
    Source source{Source::monocular};
    std::string import_pattern;  // "{trial}" is replaced by the trial index
    bool strict_predicates{false};
};

struct ScenarioConfig {
    int schema_version{1};
    std::uint64_t seed{1};
    int trials{1};
    SceneSpec scene{};
    NoiseSpec noise{};
    std::vector<AttackConfig> attacks;
    RelationParams relations{};
    KnowledgeBase kb = KnowledgeBase::defaults();
    double assignment_gate{0.3};
    double match_threshold{0.3};
    CameraGraphConfig camera_graph{};
    double dataset_attack_fraction{1.0};

    IntegrityContext integrity_context() const;

    static ScenarioConfig from_json(const Json& doc);
    Json to_json() const;
};

ScenarioConfig load_config(const std::string& path);

struct TrialRecord {
    int index{0};
    std::uint64_t seed{0};
    std::string scene_digest;
    Scene scene{};
    std::vector<Detection> camera_detections;
    std::vector<Detection> lidar_benign;
    std::vector<Detection> lidar_final;
    SceneGraph g_cam{};
    SceneGraph g_lidar_benign{};
    SceneGraph g_lidar{};
    bool attacked{false};
    bool attack_feasible{false};
    std::optional<AttackResult> attack;
    std::string attacked_node_id;
    int relation_flips{0};
    ConsistencyReport report{};
    std::vector<FusedObject> fused;

    // Attacked, feasible, and the attacked lidar node labeled inconsistent.
    bool detected() const;
    // Count of inconsistent labels (nodes + edges); nonzero in a benign trial
    // is a false alarm.
    int inconsistent_labels() const;
};

struct Metrics {
    std::optional<double> attack_detection_rate;
    std::optional<double> false_alarm_rate;
    double mean_displacement_m{0.0};
    double max_displacement_m{0.0};
    double mean_achieved_iou{0.0};
    std::optional<double> no_flip_fraction;
    int trial_count{0};
    int attacked_count{0};
    int feasible_count{0};
};

struct RunReport {
    int schema_version{1};
    std::string config_digest;
    std::vector<TrialRecord> trials;
    Metrics metrics{};
};

// Full pipeline per trial: generate -> pseudo-detect both sensors -> attack
// (when configured) -> build graphs -> per-sensor constraints -> node match
// -> cross-check -> hypotheses -> fusion. Deterministic for a fixed config.
RunReport run_scenario(const ScenarioConfig& config);

Metrics compute_metrics(const std::vector<TrialRecord>& trials);

// Runs one trial of the pipeline (also the dataset-record generator).
TrialRecord run_trial(const ScenarioConfig& config, int trial_index, bool with_attacks);

// --- serialization ---

std::uint64_t fnv1a64(const std::string& bytes);
std::string digest_hex(const std::string& bytes);

Json scene_to_json(const Scene& scene);
Scene scene_from_json(const Json& doc);
std::string scene_digest(const Scene& scene);

Json detections_to_json(const std::vector<Detection>& dets);
std::vector<Detection> detections_from_json(const Json& doc);

Json consistency_to_json(const ConsistencyReport& report);
Json attack_result_to_json(const AttackResult& result);
Json fused_to_json(const std::vector<FusedObject>& fused);
Json metrics_to_json(const Metrics& metrics);
Json trial_to_json(const TrialRecord& trial);
Json run_report_to_json(const RunReport& report);

// CSV columns: trial,attacked,detected,displacement_m,achieved_iou,
// relation_flips,false_alarms
std::string metrics_csv(const RunReport& report);

enum class GraphFormat { json, dot };

// json: the published scene-graph schema. dot: nodes labeled by class, edges
// by predicate; with a report, inconsistent edges render dashed red.
std::string export_graph(const SceneGraph& g, GraphFormat format,
                         const ConsistencyReport* report = nullptr);

// Structural validators for the published schemas; throw SchemaViolation.
void validate_graph_document(const Json& doc);
void validate_run_report_document(const Json& doc);
void validate_manifest_document(const Json& doc);

// Writes `count` records (scene, detections, graphs, attacked variants per
// the dataset attack fraction) under out_dir plus a manifest.json listing
// files, seeds and per-predicate edge counts. Returns the manifest.
Json generate_dataset(const ScenarioConfig& config, int count,
                      const std::string& out_dir);

// Shared frame-bundle document used by the stage-wise CLI commands.
Json frame_bundle_to_json(const TrialRecord& trial);

void write_text_file(const std::string& path, const std::string& text);
Json read_json_file(const std::string& path);

}  // namespace sgsim

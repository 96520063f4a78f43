#pragma once

#include "sgsim/attack.hpp"
#include "sgsim/sgg.hpp"

#include <map>
#include <string>
#include <vector>

namespace sgsim {

enum class RuleKind {
    mutual_exclusion,      // p(A,B) and q(A,B) may not both hold
    implication_excludes,  // p(A,B) implies not q(A,B)
    acyclicity,            // the p-subgraph must be acyclic
    symmetry_requirement,  // p(A,B) written implies p(B,A) written
};

struct ConstraintRule {
    RuleKind kind{RuleKind::mutual_exclusion};
    Predicate p{Predicate::close_to};
    Predicate q{Predicate::far_from};  // unused for acyclicity / symmetry
    std::string name;
};

// Commonsense rule set plus the class-dimension plausibility table.
// mutual_exclusion and implication_excludes are evaluated over the
// complement-expanded graph; symmetry_requirement over the edges as written.
struct KnowledgeBase {
    std::vector<ConstraintRule> rules;
    ClassPriorTable priors = ClassPriorTable::defaults();
    bool check_dims{true};

    static KnowledgeBase defaults();
};

struct Violation {
    std::string rule;
    std::vector<std::string> node_ids;
    std::vector<GraphEdge> edges;
    std::string detail;
};

std::vector<Violation> check_constraints(const SceneGraph& g, const KnowledgeBase& kb);

// Bipartite camera<->lidar node matching. Affinity is the image-plane IoU of
// the camera box against the projected lidar box, gated by class equality;
// pairs below the threshold are left unmatched.
struct NodeMatch {
    struct Pair {
        std::string camera_id;
        std::string lidar_id;
        double affinity;
    };
    std::vector<Pair> pairs;
    std::vector<std::string> unmatched_camera;
    std::vector<std::string> unmatched_lidar;

    const Pair* for_camera(const std::string& id) const;
    const Pair* for_lidar(const std::string& id) const;
};

NodeMatch match_nodes(const SceneGraph& g_cam, const SceneGraph& g_lidar,
                      const std::vector<Detection>& camera_detections,
                      const std::vector<Detection>& lidar_detections,
                      const CameraModel& cam, double threshold);

enum class Label { consistent, inconsistent, unknown };

std::string to_string(Label label);

enum class HypothesisKind { translation_along_ray, false_positive, false_negative };

std::string to_string(HypothesisKind kind);

struct PerturbationHypothesis {
    std::string suspect;  // lidar node id (camera node id for false_negative)
    HypothesisKind kind{HypothesisKind::translation_along_ray};
    double displacement_m{0.0};   // best-scoring attacker translation (signed)
    double displacement_lo{0.0};  // relation-flip band around the best value
    double displacement_hi{0.0};
    double score{0.0};  // fraction of inconsistent edges resolved
};

// Per-node and per-edge verdicts over both graphs, plus the per-sensor
// constraint violations and perturbation hypotheses attached by the caller.
struct ConsistencyReport {
    std::map<std::string, Label> camera_node_labels;
    std::map<std::string, Label> lidar_node_labels;
    std::map<GraphEdge, Label> camera_edge_labels;
    std::map<GraphEdge, Label> lidar_edge_labels;
    std::vector<Violation> violations;
    std::vector<PerturbationHypothesis> hypotheses;

    int inconsistent_count() const;
    bool node_inconsistent(Sensor sensor, const std::string& id) const;
};

// Camera<->lidar predicate correspondence used by cross_check. The defaults
// implement: in_front_of <-> front_of, near <-> (close_to OR next_to),
// occluding <-> occluding, following <-> following, with the contradiction
// table {in_front_of(A,B) vs front_of(B,A), near(A,B) vs far_from(A,B),
// occluding(A,B) vs occluding(B,A)}.
struct VocabMap {
    static VocabMap defaults();
};

// Classifies every node and edge of both graphs. Edges between matched
// endpoints: agreeing -> consistent, contradicting -> inconsistent, present
// on one side without counterpart or contradiction -> unknown. Edges with an
// unmatched endpoint -> unknown. A node is inconsistent when incident to an
// inconsistent edge; unmatched nodes are unknown; other matched nodes are
// consistent.
ConsistencyReport cross_check(const SceneGraph& g_cam, const SceneGraph& g_lidar,
                              const NodeMatch& match, const VocabMap& vocab);

// Everything hypothesize_perturbation needs to re-derive graphs under a
// candidate repair.
struct IntegrityContext {
    Pose ego{};
    CameraModel cam{};
    RelationParams relations{};
    ClassPriorTable priors = ClassPriorTable::defaults();
    double match_threshold{0.3};
    double grid_step_m{0.5};   // candidate-translation grid resolution
    double max_depth_m{150.0};
};

// For each inconsistent lidar node, searches candidate attacker translations
// along the node's frustum axis (re-deriving the lidar graph at each grid
// point) plus removal (false positive); unmatched camera nodes yield missing-
// detection (false negative) candidates. A hypothesis's score is the fraction
// of originally-inconsistent edges that become consistent under the repair.
// Sorted by score descending, ties by suspect id then kind.
std::vector<PerturbationHypothesis> hypothesize_perturbation(
    const ConsistencyReport& report, const SceneGraph& g_cam,
    const SceneGraph& g_lidar, const std::vector<Detection>& camera_detections,
    const std::vector<Detection>& lidar_detections, const AttackConstraints& c,
    const IntegrityContext& ctx);

}  // namespace sgsim

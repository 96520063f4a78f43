#pragma once

#include "sgsim/scene.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace sgsim {

// Relation vocabulary. The first eleven are the 3D rule vocabulary; the last
// two are the camera vocabulary used by the monocular lifter and external
// (foundation-model style) graph documents.
enum class Predicate {
    front_of,
    behind,
    left_of,
    right_of,
    occluding,
    occluded_by,
    following,
    followed_by,
    far_from,
    close_to,
    next_to,
    in_front_of,  // camera alias of front_of
    near,         // camera alias of (close_to OR next_to)
};

constexpr std::array<Predicate, 13> kAllPredicates = {
    Predicate::front_of,   Predicate::behind,      Predicate::left_of,
    Predicate::right_of,   Predicate::occluding,   Predicate::occluded_by,
    Predicate::following,  Predicate::followed_by, Predicate::far_from,
    Predicate::close_to,   Predicate::next_to,     Predicate::in_front_of,
    Predicate::near,
};

// 3D rule vocabulary evaluated over every ordered detection pair.
constexpr std::array<Predicate, 11> kLidarPredicates = {
    Predicate::front_of,   Predicate::behind,      Predicate::left_of,
    Predicate::right_of,   Predicate::occluding,   Predicate::occluded_by,
    Predicate::following,  Predicate::followed_by, Predicate::far_from,
    Predicate::close_to,   Predicate::next_to,
};

std::string to_string(Predicate p);
std::optional<Predicate> predicate_from_string(const std::string& name);

// complement(p)(B, A) holds exactly when p(A, B) holds. Symmetric predicates
// (far_from, close_to, next_to, near) are their own complement.
Predicate complement_of(Predicate p);
bool is_symmetric(Predicate p);
bool is_camera_vocab(Predicate p);

// The member of each complement pair kept by reduce_graph.
bool is_canonical(Predicate p);

// Geometric thresholds behind the relation functions. Distances are in
// meters in the ego frame (x forward, y left).
struct RelationParams {
    double d_close{10.0};
    double d_far{25.0};
    double next_to_lateral{4.0};
    double next_to_forward{2.0};
    double front_margin{1.0};       // delta_f
    double lane_half_width{1.75};   // corridor gate is 2 * lane_half_width
    double occlusion_overlap{0.3};  // tau_occ
    double following_max_gap{25.0};
    double heading_cos_min{0.9};
    double min_speed{0.5};

    void validate() const;
};

struct GraphNode {
    std::string id;
    ObjectClass cls{ObjectClass::car};
    Sensor sensor{Sensor::lidar};
    std::optional<Box3D> box3;
    std::optional<Box2D> box2;
};

struct GraphEdge {
    std::string subject;
    Predicate predicate{Predicate::front_of};
    std::string object;

    friend auto operator<=>(const GraphEdge&, const GraphEdge&) = default;
};

struct SceneGraph {
    Sensor sensor{Sensor::lidar};
    bool reduced{false};
    std::vector<GraphNode> nodes;
    std::vector<GraphEdge> edges;

    const GraphNode* find_node(const std::string& id) const;
    bool has_edge(const std::string& subj, Predicate p, const std::string& obj) const;
    std::set<GraphEdge> edge_set() const;
};

// Truth value of a 3D rule predicate for an ordered detection pair. Both
// detections must be lidar (3D). Camera aliases raise UnsupportedPredicate.
//
// Orientation convention, fixed project-wide: front_of(A, B) means A lies
// between ego and B along ego's forward axis (A is nearer, in the same
// corridor), matching how "in front of" reads in a forward-facing camera
// image. left_of(A, B) means A is to the left of B in the ego frame.
bool evaluate_predicate(Predicate p, const Detection& subj, const Detection& obj,
                        const Pose& ego, const RelationParams& params,
                        const CameraModel& cam);

// Full (non-reduced) graph: every rule predicate evaluated over every ordered
// pair. Complement closure holds by construction.
SceneGraph build_graph_lidar(const std::vector<Detection>& detections,
                             const Pose& ego, const CameraModel& cam,
                             const RelationParams& params);

// Canonicalizes every edge (complement pairs collapse to the canonical
// member, symmetric predicates keep the min-id orientation), dedupes, and
// marks the graph reduced. Idempotent.
SceneGraph reduce_graph(const SceneGraph& g);

// Adds the complement of every edge (mirrored), yielding the full closure.
// Inverse of reduce_graph on rule-built graphs.
SceneGraph expand_graph(const SceneGraph& g);

// Depth estimate for a camera detection from its pixel height and the class
// height prior. lo/hi bound the depth over the full prior range; edges are
// only emitted by the monocular lifter when the bounds certify the relation.
struct MonocularEstimate {
    Vec3 position;        // pseudo-3D center, world frame, at `depth`
    double depth;         // point estimate from the nominal class height
    double depth_lo;
    double depth_hi;
    bool clipped;         // 2D box touches the image border; bounds unreliable
};

MonocularEstimate monocular_estimate(const Detection& det, const CameraModel& cam,
                                     const ClassPriorTable& priors);

// Lifts 2D detections to pseudo-3D poses via the class-height depth proxy and
// emits camera-vocabulary edges (in_front_of, near, occluding). An edge is
// emitted only when it holds for every depth in the prior-derived bounds, so
// at zero pixel noise the camera graph never asserts a false relation.
// `following` is omitted: 2D detections carry no velocity.
SceneGraph build_graph_monocular(const std::vector<Detection>& detections,
                                 const CameraModel& cam,
                                 const RelationParams& params,
                                 const ClassPriorTable& priors);

// Parses a scene-graph document (see graph_to_json for the schema). Unknown
// predicate strings are mapped to the nearest supported name in lenient mode
// (edit distance <= 2, otherwise the edge is dropped); strict mode raises
// UnknownPredicate. Structural problems raise SchemaViolation. The imported
// graph is treated as a camera-side graph.
SceneGraph import_external_graph(const nlohmann::json& doc, bool strict);

// Serializes to the published schema:
//   {"sensor": str, "reduced": bool,
//    "nodes": [{"id": str, "class": str}, ...],
//    "edges": [{"subject": str, "predicate": str, "object": str}, ...]}
nlohmann::ordered_json graph_to_json(const SceneGraph& g);

}  // namespace sgsim

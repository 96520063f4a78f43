#include "sgsim/sgg.hpp"

#include "sgsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace sgsim {

std::string to_string(Predicate p) {
    switch (p) {
        case Predicate::front_of: return "front_of";
        case Predicate::behind: return "behind";
        case Predicate::left_of: return "left_of";
        case Predicate::right_of: return "right_of";
        case Predicate::occluding: return "occluding";
        case Predicate::occluded_by: return "occluded_by";
        case Predicate::following: return "following";
        case Predicate::followed_by: return "followed_by";
        case Predicate::far_from: return "far_from";
        case Predicate::close_to: return "close_to";
        case Predicate::next_to: return "next_to";
        case Predicate::in_front_of: return "in_front_of";
        case Predicate::near: return "near";
    }
    return "front_of";
}

std::optional<Predicate> predicate_from_string(const std::string& name) {
    for (Predicate p : kAllPredicates) {
        if (to_string(p) == name) return p;
    }
    return std::nullopt;
}

Predicate complement_of(Predicate p) {
    switch (p) {
        case Predicate::front_of: return Predicate::behind;
        case Predicate::behind: return Predicate::front_of;
        case Predicate::left_of: return Predicate::right_of;
        case Predicate::right_of: return Predicate::left_of;
        case Predicate::occluding: return Predicate::occluded_by;
        case Predicate::occluded_by: return Predicate::occluding;
        case Predicate::following: return Predicate::followed_by;
        case Predicate::followed_by: return Predicate::following;
        case Predicate::in_front_of: return Predicate::behind;
        default: return p;  // far_from, close_to, next_to, near: self
    }
}

bool is_symmetric(Predicate p) {
    return p == Predicate::far_from || p == Predicate::close_to ||
           p == Predicate::next_to || p == Predicate::near;
}

bool is_camera_vocab(Predicate p) {
    return p == Predicate::in_front_of || p == Predicate::near;
}

bool is_canonical(Predicate p) {
    switch (p) {
        case Predicate::behind:
        case Predicate::right_of:
        case Predicate::occluded_by:
        case Predicate::followed_by:
            return false;
        default:
            return true;
    }
}

void RelationParams::validate() const {
    if (!(d_close < d_far)) throw ConfigError("relations: d_close must be < d_far");
    if (d_close <= 0.0 || next_to_lateral <= 0.0 || next_to_forward <= 0.0 ||
        front_margin <= 0.0 || lane_half_width <= 0.0 || following_max_gap <= 0.0 ||
        min_speed <= 0.0) {
        throw ConfigError("relations: thresholds must be positive");
    }
    if (!(occlusion_overlap > 0.0 && occlusion_overlap < 1.0)) {
        throw ConfigError("relations: occlusion_overlap must be in (0,1)");
    }
}

const GraphNode* SceneGraph::find_node(const std::string& id) const {
    for (const GraphNode& n : nodes) {
        if (n.id == id) return &n;
    }
    return nullptr;
}

bool SceneGraph::has_edge(const std::string& subj, Predicate p,
                          const std::string& obj) const {
    return std::find(edges.begin(), edges.end(), GraphEdge{subj, p, obj}) !=
           edges.end();
}

std::set<GraphEdge> SceneGraph::edge_set() const {
    return {edges.begin(), edges.end()};
}

namespace {

struct PairFrame {
    double dx;  // x_subj - x_obj in the ego frame
    double dy;  // y_subj - y_obj
    double dist;
};

PairFrame pair_frame(const Detection& subj, const Detection& obj, const Pose& ego) {
    Vec3 a = ego.to_local(subj.box_3d().center);
    Vec3 b = ego.to_local(obj.box_3d().center);
    return {a.x() - b.x(), a.y() - b.y(), (a - b).norm()};
}

}  // namespace

bool evaluate_predicate(Predicate p, const Detection& subj, const Detection& obj,
                        const Pose& ego, const RelationParams& params,
                        const CameraModel& cam) {
    if (is_camera_vocab(p)) {
        throw UnsupportedPredicate("predicate " + to_string(p) +
                                   " is camera vocabulary; not evaluable over 3D boxes");
    }
    switch (p) {
        case Predicate::front_of: {
            // subj sits between ego and obj, same corridor.
            PairFrame f = pair_frame(subj, obj, ego);
            return -f.dx > params.front_margin &&
                   std::abs(f.dy) < 2.0 * params.lane_half_width;
        }
        case Predicate::behind:
            return evaluate_predicate(Predicate::front_of, obj, subj, ego, params, cam);
        case Predicate::left_of: {
            PairFrame f = pair_frame(subj, obj, ego);
            return f.dy > params.front_margin &&
                   std::abs(f.dx) < params.following_max_gap;
        }
        case Predicate::right_of:
            return evaluate_predicate(Predicate::left_of, obj, subj, ego, params, cam);
        case Predicate::occluding:
            return occlusion_fraction(obj.box_3d(), subj.box_3d(), cam) >
                   params.occlusion_overlap;
        case Predicate::occluded_by:
            return evaluate_predicate(Predicate::occluding, obj, subj, ego, params, cam);
        case Predicate::following: {
            if (!subj.velocity || !obj.velocity) return false;
            if (!evaluate_predicate(Predicate::behind, subj, obj, ego, params, cam)) {
                return false;
            }
            PairFrame f = pair_frame(subj, obj, ego);
            if (f.dx >= params.following_max_gap) return false;
            if (std::abs(f.dy) >= 2.0) return false;
            double sa = subj.velocity->norm();
            double sb = obj.velocity->norm();
            if (sa <= params.min_speed || sb <= params.min_speed) return false;
            double cosine = subj.velocity->dot(*obj.velocity) / (sa * sb);
            return cosine > params.heading_cos_min;
        }
        case Predicate::followed_by:
            return evaluate_predicate(Predicate::following, obj, subj, ego, params, cam);
        case Predicate::far_from:
            return pair_frame(subj, obj, ego).dist > params.d_far;
        case Predicate::close_to:
            return pair_frame(subj, obj, ego).dist < params.d_close;
        case Predicate::next_to: {
            PairFrame f = pair_frame(subj, obj, ego);
            return std::abs(f.dy) < params.next_to_lateral &&
                   std::abs(f.dx) < params.next_to_forward;
        }
        default:
            return false;
    }
}

SceneGraph build_graph_lidar(const std::vector<Detection>& detections,
                             const Pose& ego, const CameraModel& cam,
                             const RelationParams& params) {
    params.validate();
    SceneGraph g;
    g.sensor = Sensor::lidar;
    g.reduced = false;
    for (const Detection& d : detections) {
        g.nodes.push_back({d.id, d.cls, Sensor::lidar, d.box_3d(), std::nullopt});
    }
    for (const Detection& a : detections) {
        for (const Detection& b : detections) {
            if (a.id == b.id) continue;
            for (Predicate p : kLidarPredicates) {
                if (evaluate_predicate(p, a, b, ego, params, cam)) {
                    g.edges.push_back({a.id, p, b.id});
                }
            }
        }
    }
    return g;
}

SceneGraph reduce_graph(const SceneGraph& g) {
    SceneGraph out;
    out.sensor = g.sensor;
    out.reduced = true;
    out.nodes = g.nodes;
    std::set<GraphEdge> canon;
    for (const GraphEdge& e : g.edges) {
        GraphEdge c = e;
        if (!is_canonical(c.predicate)) {
            c = {e.object, complement_of(e.predicate), e.subject};
        }
        if (is_symmetric(c.predicate) && c.object < c.subject) {
            std::swap(c.subject, c.object);
        }
        canon.insert(c);
    }
    out.edges.assign(canon.begin(), canon.end());
    return out;
}

SceneGraph expand_graph(const SceneGraph& g) {
    SceneGraph out;
    out.sensor = g.sensor;
    out.reduced = false;
    out.nodes = g.nodes;
    std::set<GraphEdge> all;
    for (const GraphEdge& e : g.edges) {
        all.insert(e);
        all.insert({e.object, complement_of(e.predicate), e.subject});
    }
    out.edges.assign(all.begin(), all.end());
    return out;
}

MonocularEstimate monocular_estimate(const Detection& det, const CameraModel& cam,
                                     const ClassPriorTable& priors) {
    const Box2D& box = det.box_2d();
    const ClassPrior& prior = priors.of(det.cls);
    double h_pix = std::max(box.h, 1e-6);
    MonocularEstimate est;
    est.depth = cam.fv * prior.nominal.h / h_pix;
    est.depth_lo = cam.fv * prior.lo().h / h_pix;
    est.depth_hi = cam.fv * prior.hi().h / h_pix;
    est.clipped = box.left() <= 0.5 || box.top() <= 0.5 ||
                  box.right() >= cam.width - 0.5 || box.bottom() >= cam.height - 0.5;

    const Pose& ext = cam.extrinsic;
    Vec3 right{std::sin(ext.yaw), -std::cos(ext.yaw), 0.0};
    Vec3 dir = ext.forward() + right * ((box.cx - cam.cu) / cam.fu) +
               Vec3{0.0, 0.0, -1.0} * ((box.cy - cam.cv) / cam.fv);
    est.position = ext.position + dir * est.depth;
    return est;
}

namespace {

// Pseudo-3D center at a hypothetical depth, along the detection's pixel ray.
Vec3 position_at_depth(const MonocularEstimate& est, const CameraModel& cam,
                       double depth) {
    Vec3 dir = (est.position - cam.extrinsic.position) / est.depth;
    return cam.extrinsic.position + dir * depth;
}

double hull_overlap_fraction(const Box2D& subject, const Box2D& blocker) {
    double ix = std::min(subject.right(), blocker.right()) -
                std::max(subject.left(), blocker.left());
    double iy = std::min(subject.bottom(), blocker.bottom()) -
                std::max(subject.top(), blocker.top());
    double inter = std::max(ix, 0.0) * std::max(iy, 0.0);
    return subject.area() > 0.0 ? inter / subject.area() : 0.0;
}

}  // namespace

SceneGraph build_graph_monocular(const std::vector<Detection>& detections,
                                 const CameraModel& cam,
                                 const RelationParams& params,
                                 const ClassPriorTable& priors) {
    params.validate();
    SceneGraph g;
    g.sensor = Sensor::camera;
    g.reduced = true;

    std::vector<MonocularEstimate> est;
    est.reserve(detections.size());
    for (const Detection& d : detections) {
        g.nodes.push_back({d.id, d.cls, Sensor::camera, std::nullopt, d.box_2d()});
        est.push_back(monocular_estimate(d, cam, priors));
    }

    Pose ego = cam.extrinsic;  // camera frame doubles as the ego frame here
    auto local_at = [&](std::size_t i, double depth) {
        return ego.to_local(position_at_depth(est[i], cam, depth));
    };

    std::set<GraphEdge> edges;
    for (std::size_t i = 0; i < detections.size(); ++i) {
        for (std::size_t j = 0; j < detections.size(); ++j) {
            if (i == j) continue;
            if (est[i].clipped || est[j].clipped) continue;
            const std::string& a = detections[i].id;
            const std::string& b = detections[j].id;
            const double combos_i[2] = {est[i].depth_lo, est[i].depth_hi};
            const double combos_j[2] = {est[j].depth_lo, est[j].depth_hi};

            // in_front_of(a, b): a certainly nearer by at least the front
            // margin and certainly within the corridor, over the whole prior
            // depth range of both detections.
            if (est[j].depth_lo - est[i].depth_hi > params.front_margin) {
                double max_dy = 0.0;
                for (double zi : combos_i) {
                    for (double zj : combos_j) {
                        Vec3 pa = local_at(i, zi);
                        Vec3 pb = local_at(j, zj);
                        max_dy = std::max(max_dy, std::abs(pa.y() - pb.y()));
                    }
                }
                if (max_dy < 2.0 * params.lane_half_width) {
                    edges.insert({a, Predicate::in_front_of, b});
                }
            }

            if (i < j) {
                // near(a, b): certainly close_to, or certainly next_to.
                double max_dist = 0.0;
                double max_dy = 0.0;
                double max_dx = 0.0;
                for (double zi : combos_i) {
                    for (double zj : combos_j) {
                        Vec3 pa = local_at(i, zi);
                        Vec3 pb = local_at(j, zj);
                        max_dist = std::max(max_dist, (pa - pb).norm());
                        max_dy = std::max(max_dy, std::abs(pa.y() - pb.y()));
                        max_dx = std::max(max_dx, std::abs(pa.x() - pb.x()));
                    }
                }
                bool certainly_close = max_dist < params.d_close;
                bool certainly_next_to = max_dy < params.next_to_lateral &&
                                         max_dx < params.next_to_forward;
                if (certainly_close || certainly_next_to) {
                    edges.insert({a, Predicate::near, b});
                }
            }

            // occluding(a, b): hull overlap with certain depth ordering.
            if (est[j].depth_lo - est[i].depth_hi > 0.0) {
                double frac = hull_overlap_fraction(detections[j].box_2d(),
                                                    detections[i].box_2d());
                if (frac > params.occlusion_overlap) {
                    edges.insert({a, Predicate::occluding, b});
                }
            }
        }
    }
    g.edges.assign(edges.begin(), edges.end());
    return g;
}

namespace {

std::string normalize_token(const std::string& raw) {
    std::string out;
    for (char ch : raw) {
        if (std::isalnum(static_cast<unsigned char>(ch))) {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        } else if (!out.empty() && out.back() != '_') {
            out.push_back('_');
        }
    }
    while (!out.empty() && out.back() == '_') out.pop_back();
    return out;
}

std::size_t levenshtein(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::optional<Predicate> resolve_predicate(const std::string& raw, bool strict) {
    std::string norm = normalize_token(raw);
    if (auto exact = predicate_from_string(norm)) return exact;
    if (strict) {
        throw UnknownPredicate("unknown predicate \"" + raw + "\"");
    }
    std::size_t best_dist = 3;  // accept distance <= 2
    std::optional<Predicate> best;
    for (Predicate p : kAllPredicates) {
        std::size_t d = levenshtein(norm, to_string(p));
        if (d < best_dist) {
            best_dist = d;
            best = p;
        }
    }
    return best;
}

ObjectClass resolve_class(const std::string& raw) {
    static const std::map<std::string, ObjectClass> synonyms = {
        {"person", ObjectClass::pedestrian}, {"human", ObjectClass::pedestrian},
        {"bike", ObjectClass::bicycle},      {"cyclist", ObjectClass::bicycle},
        {"automobile", ObjectClass::car},    {"sedan", ObjectClass::car},
        {"vehicle", ObjectClass::car},       {"lorry", ObjectClass::truck},
        {"semi", ObjectClass::truck},        {"minivan", ObjectClass::van},
    };
    std::string norm = normalize_token(raw);
    if (auto cls = class_from_string(norm)) return *cls;
    auto it = synonyms.find(norm);
    if (it != synonyms.end()) return it->second;
    throw SchemaViolation("unknown object class \"" + raw + "\"");
}

}  // namespace

SceneGraph import_external_graph(const nlohmann::json& doc, bool strict) {
    if (!doc.is_object()) throw SchemaViolation("graph document must be an object");
    for (const char* field : {"sensor", "reduced", "nodes", "edges"}) {
        if (!doc.contains(field)) {
            throw SchemaViolation(std::string("graph document missing \"") + field + "\"");
        }
    }
    if (!doc["sensor"].is_string() || !doc["reduced"].is_boolean() ||
        !doc["nodes"].is_array() || !doc["edges"].is_array()) {
        throw SchemaViolation("graph document field has wrong type");
    }

    SceneGraph g;
    g.sensor = Sensor::camera;  // the import path is the camera-side adapter
    g.reduced = doc["reduced"].get<bool>();

    std::set<std::string> ids;
    for (const auto& n : doc["nodes"]) {
        if (!n.is_object() || !n.contains("id") || !n.contains("class") ||
            !n["id"].is_string() || !n["class"].is_string()) {
            throw SchemaViolation("node entries must be {\"id\": str, \"class\": str}");
        }
        std::string id = n["id"].get<std::string>();
        if (id.empty()) throw SchemaViolation("node id must be non-empty");
        if (!ids.insert(id).second) {
            throw SchemaViolation("duplicate node id \"" + id + "\"");
        }
        g.nodes.push_back({id, resolve_class(n["class"].get<std::string>()),
                           Sensor::camera, std::nullopt, std::nullopt});
    }

    std::set<GraphEdge> seen;
    for (const auto& e : doc["edges"]) {
        if (!e.is_object() || !e.contains("subject") || !e.contains("predicate") ||
            !e.contains("object") || !e["subject"].is_string() ||
            !e["predicate"].is_string() || !e["object"].is_string()) {
            throw SchemaViolation(
                "edge entries must be {\"subject\", \"predicate\", \"object\"} strings");
        }
        std::string subj = e["subject"].get<std::string>();
        std::string obj = e["object"].get<std::string>();
        if (!ids.count(subj)) throw SchemaViolation("edge references missing node \"" + subj + "\"");
        if (!ids.count(obj)) throw SchemaViolation("edge references missing node \"" + obj + "\"");
        if (subj == obj) throw SchemaViolation("edge subject and object must differ");
        auto pred = resolve_predicate(e["predicate"].get<std::string>(), strict);
        if (!pred) continue;  // lenient mode: unmappable predicate, edge dropped
        GraphEdge edge{subj, *pred, obj};
        if (!seen.insert(edge).second) {
            throw SchemaViolation("duplicate edge (" + subj + ", " +
                                  to_string(*pred) + ", " + obj + ")");
        }
        g.edges.push_back(edge);
    }
    return g;
}

nlohmann::ordered_json graph_to_json(const SceneGraph& g) {
    nlohmann::ordered_json doc;
    doc["sensor"] = to_string(g.sensor);
    doc["reduced"] = g.reduced;
    doc["nodes"] = nlohmann::ordered_json::array();
    for (const GraphNode& n : g.nodes) {
        doc["nodes"].push_back({{"id", n.id}, {"class", to_string(n.cls)}});
    }
    doc["edges"] = nlohmann::ordered_json::array();
    for (const GraphEdge& e : g.edges) {
        doc["edges"].push_back({{"subject", e.subject},
                                {"predicate", to_string(e.predicate)},
                                {"object", e.object}});
    }
    return doc;
}

}  // namespace sgsim

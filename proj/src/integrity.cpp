#include "sgsim/integrity.hpp"

#include "sgsim/errors.hpp"
#include "sgsim/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>

namespace sgsim {

KnowledgeBase KnowledgeBase::defaults() {
    KnowledgeBase kb;
    kb.rules = {
        {RuleKind::mutual_exclusion, Predicate::close_to, Predicate::far_from,
         "close_far_exclusion"},
        {RuleKind::mutual_exclusion, Predicate::front_of, Predicate::behind,
         "front_behind_exclusion"},
        {RuleKind::implication_excludes, Predicate::following, Predicate::front_of,
         "following_implies_not_front"},
        {RuleKind::acyclicity, Predicate::occluding, Predicate::occluding,
         "occlusion_acyclic"},
    };
    return kb;
}

std::string to_string(Label label) {
    switch (label) {
        case Label::consistent: return "consistent";
        case Label::inconsistent: return "inconsistent";
        case Label::unknown: return "unknown";
    }
    return "unknown";
}

std::string to_string(HypothesisKind kind) {
    switch (kind) {
        case HypothesisKind::translation_along_ray: return "translation_along_ray";
        case HypothesisKind::false_positive: return "false_positive";
        case HypothesisKind::false_negative: return "false_negative";
    }
    return "translation_along_ray";
}

std::vector<Violation> check_constraints(const SceneGraph& g, const KnowledgeBase& kb) {
    std::vector<Violation> out;
    SceneGraph expanded = expand_graph(g);
    std::set<GraphEdge> edges = expanded.edge_set();

    for (const ConstraintRule& rule : kb.rules) {
        switch (rule.kind) {
            case RuleKind::mutual_exclusion:
            case RuleKind::implication_excludes: {
                for (const GraphEdge& e : expanded.edges) {
                    if (e.predicate != rule.p) continue;
                    GraphEdge other{e.subject, rule.q, e.object};
                    if (edges.count(other)) {
                        out.push_back({rule.name,
                                       {e.subject, e.object},
                                       {e, other},
                                       to_string(rule.p) + " and " + to_string(rule.q) +
                                           " both hold for (" + e.subject + ", " +
                                           e.object + ")"});
                    }
                }
                break;
            }
            case RuleKind::acyclicity: {
                // Iterative DFS over the rule predicate's subgraph.
                std::map<std::string, std::vector<std::string>> adj;
                for (const GraphEdge& e : expanded.edges) {
                    if (e.predicate == rule.p) adj[e.subject].push_back(e.object);
                }
                std::map<std::string, int> state;  // 0 new, 1 open, 2 done
                std::vector<std::string> cycle_nodes;
                std::function<bool(const std::string&)> dfs =
                    [&](const std::string& u) -> bool {
                    state[u] = 1;
                    for (const std::string& v : adj[u]) {
                        if (state[v] == 1) {
                            cycle_nodes.push_back(v);
                            return true;
                        }
                        if (state[v] == 0 && dfs(v)) {
                            cycle_nodes.push_back(v);
                            return true;
                        }
                    }
                    state[u] = 2;
                    return false;
                };
                for (const auto& [node, _] : adj) {
                    if (state[node] == 0 && dfs(node)) {
                        out.push_back({rule.name, cycle_nodes, {},
                                       "cycle in " + to_string(rule.p) + " subgraph"});
                        break;
                    }
                }
                break;
            }
            case RuleKind::symmetry_requirement: {
                if (g.reduced) break;  // reduced graphs store one orientation only
                std::set<GraphEdge> raw = g.edge_set();
                for (const GraphEdge& e : g.edges) {
                    if (e.predicate != rule.p) continue;
                    if (!raw.count({e.object, e.predicate, e.subject})) {
                        out.push_back({rule.name, {e.subject, e.object}, {e},
                                       to_string(rule.p) + "(" + e.subject + ", " +
                                           e.object + ") lacks its mirror"});
                    }
                }
                break;
            }
        }
    }

    if (kb.check_dims) {
        for (const GraphNode& n : g.nodes) {
            if (!n.box3) continue;
            if (!kb.priors.of(n.cls).contains(n.box3->dims)) {
                out.push_back({"class_plausibility", {n.id}, {},
                               "node " + n.id + " dims implausible for class " +
                                   to_string(n.cls)});
            }
        }
    }
    return out;
}

const NodeMatch::Pair* NodeMatch::for_camera(const std::string& id) const {
    for (const Pair& p : pairs) {
        if (p.camera_id == id) return &p;
    }
    return nullptr;
}

const NodeMatch::Pair* NodeMatch::for_lidar(const std::string& id) const {
    for (const Pair& p : pairs) {
        if (p.lidar_id == id) return &p;
    }
    return nullptr;
}

NodeMatch match_nodes(const SceneGraph& g_cam, const SceneGraph& g_lidar,
                      const std::vector<Detection>& camera_detections,
                      const std::vector<Detection>& lidar_detections,
                      const CameraModel& cam, double threshold) {
    auto find_det = [](const std::vector<Detection>& dets, const std::string& id)
        -> const Detection* {
        for (const Detection& d : dets) {
            if (d.id == id) return &d;
        }
        return nullptr;
    };

    // Affinity over graph nodes, indexed like the node vectors.
    CostMatrix m(static_cast<int>(g_cam.nodes.size()),
                 static_cast<int>(g_lidar.nodes.size()));
    for (int i = 0; i < m.rows; ++i) {
        const GraphNode& cn = g_cam.nodes[static_cast<std::size_t>(i)];
        const Detection* cd = find_det(camera_detections, cn.id);
        for (int j = 0; j < m.cols; ++j) {
            const GraphNode& ln = g_lidar.nodes[static_cast<std::size_t>(j)];
            const Detection* ld = find_det(lidar_detections, ln.id);
            if (!cd || !ld || cn.cls != ln.cls) continue;
            Projection proj = project_box(ld->box_3d(), cam);
            m.at(i, j) = proj.ok() ? iou_2d(cd->box_2d(), proj.box) : 0.0;
        }
    }
    Assignment assign = solve_assignment(m, threshold);

    NodeMatch match;
    for (const auto& pr : assign.pairs) {
        match.pairs.push_back({g_cam.nodes[static_cast<std::size_t>(pr.row)].id,
                               g_lidar.nodes[static_cast<std::size_t>(pr.col)].id,
                               pr.affinity});
    }
    for (int i : assign.unmatched_rows) {
        match.unmatched_camera.push_back(g_cam.nodes[static_cast<std::size_t>(i)].id);
    }
    for (int j : assign.unmatched_cols) {
        match.unmatched_lidar.push_back(g_lidar.nodes[static_cast<std::size_t>(j)].id);
    }
    return match;
}

VocabMap VocabMap::defaults() { return {}; }

namespace {

// Translates a camera-vocabulary predicate into the 3D rule vocabulary for
// counterpart lookups. `near` stays special (it is a disjunction).
Predicate to_rule_vocab(Predicate p) {
    return p == Predicate::in_front_of ? Predicate::front_of : p;
}

struct EdgeVerdict {
    Label label{Label::unknown};
    // Raw opposite-side edges this edge contradicts (used by the hypothesis
    // scorer to decide when a lidar-side inconsistency counts as repaired).
    std::vector<GraphEdge> contradicts;
};

// Membership helpers over expanded (complement-closed) edge sets.
bool holds(const std::set<GraphEdge>& edges, const std::string& a, Predicate p,
           const std::string& b) {
    return edges.count({a, p, b}) != 0;
}

bool implies_near(const std::set<GraphEdge>& lidar_exp, const std::string& a,
                  const std::string& b) {
    return holds(lidar_exp, a, Predicate::close_to, b) ||
           holds(lidar_exp, a, Predicate::next_to, b);
}

// Raw camera edges (as written) whose expanded form contradicts the given
// canonical claim between camera ids (a, b).
std::vector<GraphEdge> raw_camera_contradictors(const SceneGraph& g_cam,
                                                const std::string& a, Predicate p,
                                                const std::string& b) {
    std::vector<GraphEdge> out;
    for (const GraphEdge& e : g_cam.edges) {
        // Expand this single camera edge and test the contradiction table.
        const GraphEdge mirror{e.object, complement_of(e.predicate), e.subject};
        for (const GraphEdge* cand : {&e, &mirror}) {
            Predicate cp = to_rule_vocab(cand->predicate);
            bool contra = false;
            switch (p) {
                case Predicate::front_of:
                    contra = cp == Predicate::front_of && cand->subject == b &&
                             cand->object == a;
                    break;
                case Predicate::far_from:
                    contra = (cand->predicate == Predicate::near ||
                              cp == Predicate::close_to || cp == Predicate::next_to) &&
                             ((cand->subject == a && cand->object == b) ||
                              (cand->subject == b && cand->object == a));
                    break;
                case Predicate::close_to:
                case Predicate::next_to:
                    contra = cp == Predicate::far_from &&
                             ((cand->subject == a && cand->object == b) ||
                              (cand->subject == b && cand->object == a));
                    break;
                case Predicate::occluding:
                    contra = cp == Predicate::occluding && cand->subject == b &&
                             cand->object == a;
                    break;
                case Predicate::left_of:
                    contra = cp == Predicate::left_of && cand->subject == b &&
                             cand->object == a;
                    break;
                default:
                    break;
            }
            if (contra) {
                out.push_back(e);
                break;
            }
        }
    }
    return out;
}

// Verdict for one camera edge between matched endpoints, against the
// expanded lidar edge set (lidar ids la, lb correspond to subject, object).
EdgeVerdict camera_edge_verdict(const GraphEdge& e, const std::string& la,
                                const std::string& lb,
                                const std::set<GraphEdge>& lidar_exp,
                                const SceneGraph& g_lidar) {
    EdgeVerdict v;
    Predicate p = to_rule_vocab(e.predicate);
    auto contradicted_by = [&](const std::string& sa, Predicate cp,
                               const std::string& sb) {
        for (const GraphEdge& le : g_lidar.edges) {
            GraphEdge mirror{le.object, complement_of(le.predicate), le.subject};
            if ((le.subject == sa && le.predicate == cp && le.object == sb) ||
                (mirror.subject == sa && mirror.predicate == cp && mirror.object == sb)) {
                v.contradicts.push_back(le);
            }
        }
    };

    if (e.predicate == Predicate::near) {
        if (holds(lidar_exp, la, Predicate::far_from, lb)) {
            v.label = Label::inconsistent;
            contradicted_by(la, Predicate::far_from, lb);
        } else if (implies_near(lidar_exp, la, lb)) {
            v.label = Label::consistent;
        }
        return v;
    }
    switch (p) {
        case Predicate::front_of:
        case Predicate::left_of:
        case Predicate::occluding:
            if (holds(lidar_exp, lb, p, la)) {
                v.label = Label::inconsistent;
                contradicted_by(lb, p, la);
            } else if (holds(lidar_exp, la, p, lb)) {
                v.label = Label::consistent;
            }
            break;
        case Predicate::close_to:
        case Predicate::next_to:
            if (holds(lidar_exp, la, Predicate::far_from, lb)) {
                v.label = Label::inconsistent;
                contradicted_by(la, Predicate::far_from, lb);
            } else if (holds(lidar_exp, la, p, lb)) {
                v.label = Label::consistent;
            }
            break;
        case Predicate::far_from:
            if (implies_near(lidar_exp, la, lb)) {
                v.label = Label::inconsistent;
                contradicted_by(la, Predicate::close_to, lb);
                contradicted_by(la, Predicate::next_to, lb);
            } else if (holds(lidar_exp, la, Predicate::far_from, lb)) {
                v.label = Label::consistent;
            }
            break;
        case Predicate::following:
            if (holds(lidar_exp, la, Predicate::following, lb)) {
                v.label = Label::consistent;
            }
            break;
        default:
            break;
    }
    return v;
}

// Verdict for one lidar edge between matched endpoints (camera ids a, b),
// against the expanded camera edge set.
EdgeVerdict lidar_edge_verdict(const GraphEdge& e, const std::string& a,
                               const std::string& b,
                               const std::set<GraphEdge>& cam_exp,
                               const SceneGraph& g_cam) {
    EdgeVerdict v;
    auto cam_holds = [&](const std::string& sa, Predicate p, const std::string& sb) {
        if (holds(cam_exp, sa, p, sb)) return true;
        // Camera edges may be written in either vocabulary.
        return p == Predicate::front_of && holds(cam_exp, sa, Predicate::in_front_of, sb);
    };
    auto cam_near = [&](const std::string& sa, const std::string& sb) {
        return holds(cam_exp, sa, Predicate::near, sb) ||
               holds(cam_exp, sa, Predicate::close_to, sb) ||
               holds(cam_exp, sa, Predicate::next_to, sb);
    };

    switch (e.predicate) {
        case Predicate::front_of:
        case Predicate::behind:
        case Predicate::left_of:
        case Predicate::right_of:
        case Predicate::occluding:
        case Predicate::occluded_by:
        case Predicate::following:
        case Predicate::followed_by: {
            // Work on the canonical orientation of the claim.
            std::string sa = a;
            std::string sb = b;
            Predicate p = e.predicate;
            if (!is_canonical(p)) {
                p = complement_of(p);
                std::swap(sa, sb);
            }
            if (p == Predicate::following) {
                if (cam_holds(sa, Predicate::following, sb)) v.label = Label::consistent;
                return v;
            }
            if (cam_holds(sb, p, sa)) {
                v.label = Label::inconsistent;
                v.contradicts = raw_camera_contradictors(g_cam, sa, p, sb);
            } else if (cam_holds(sa, p, sb)) {
                v.label = Label::consistent;
            }
            return v;
        }
        case Predicate::close_to:
        case Predicate::next_to:
            if (holds(cam_exp, a, Predicate::far_from, b)) {
                v.label = Label::inconsistent;
                v.contradicts = raw_camera_contradictors(g_cam, a, e.predicate, b);
            } else if (cam_near(a, b)) {
                v.label = Label::consistent;
            }
            return v;
        case Predicate::far_from:
            if (cam_near(a, b)) {
                v.label = Label::inconsistent;
                v.contradicts = raw_camera_contradictors(g_cam, a, Predicate::far_from, b);
            } else if (holds(cam_exp, a, Predicate::far_from, b)) {
                v.label = Label::consistent;
            }
            return v;
        default:
            return v;
    }
}

}  // namespace

int ConsistencyReport::inconsistent_count() const {
    int n = 0;
    for (const auto& [_, label] : camera_edge_labels) {
        if (label == Label::inconsistent) ++n;
    }
    for (const auto& [_, label] : lidar_edge_labels) {
        if (label == Label::inconsistent) ++n;
    }
    return n;
}

bool ConsistencyReport::node_inconsistent(Sensor sensor, const std::string& id) const {
    const auto& labels =
        sensor == Sensor::camera ? camera_node_labels : lidar_node_labels;
    auto it = labels.find(id);
    return it != labels.end() && it->second == Label::inconsistent;
}

ConsistencyReport cross_check(const SceneGraph& g_cam, const SceneGraph& g_lidar,
                              const NodeMatch& match, const VocabMap&) {
    ConsistencyReport report;

    std::map<std::string, std::string> cam_to_lidar;
    std::map<std::string, std::string> lidar_to_cam;
    for (const auto& pr : match.pairs) {
        cam_to_lidar[pr.camera_id] = pr.lidar_id;
        lidar_to_cam[pr.lidar_id] = pr.camera_id;
    }

    std::set<GraphEdge> cam_exp = expand_graph(g_cam).edge_set();
    std::set<GraphEdge> lidar_exp = expand_graph(g_lidar).edge_set();

    for (const GraphEdge& e : g_cam.edges) {
        auto sit = cam_to_lidar.find(e.subject);
        auto oit = cam_to_lidar.find(e.object);
        Label label = Label::unknown;
        if (sit != cam_to_lidar.end() && oit != cam_to_lidar.end()) {
            label = camera_edge_verdict(e, sit->second, oit->second, lidar_exp, g_lidar)
                        .label;
        }
        report.camera_edge_labels[e] = label;
    }
    for (const GraphEdge& e : g_lidar.edges) {
        auto sit = lidar_to_cam.find(e.subject);
        auto oit = lidar_to_cam.find(e.object);
        Label label = Label::unknown;
        if (sit != lidar_to_cam.end() && oit != lidar_to_cam.end()) {
            label = lidar_edge_verdict(e, sit->second, oit->second, cam_exp, g_cam).label;
        }
        report.lidar_edge_labels[e] = label;
    }

    auto node_label = [](const std::string& id, bool matched,
                         const std::map<GraphEdge, Label>& edge_labels) {
        if (!matched) return Label::unknown;
        for (const auto& [edge, label] : edge_labels) {
            if (label == Label::inconsistent && (edge.subject == id || edge.object == id)) {
                return Label::inconsistent;
            }
        }
        return Label::consistent;
    };
    for (const GraphNode& n : g_cam.nodes) {
        report.camera_node_labels[n.id] =
            node_label(n.id, cam_to_lidar.count(n.id) != 0, report.camera_edge_labels);
    }
    for (const GraphNode& n : g_lidar.nodes) {
        report.lidar_node_labels[n.id] =
            node_label(n.id, lidar_to_cam.count(n.id) != 0, report.lidar_edge_labels);
    }
    return report;
}

namespace {

struct RepairOutcome {
    ConsistencyReport report;
};

RepairOutcome evaluate_repair(const SceneGraph& g_cam,
                              const std::vector<Detection>& camera_detections,
                              const std::vector<Detection>& lidar_detections,
                              const IntegrityContext& ctx) {
    SceneGraph g_lidar =
        build_graph_lidar(lidar_detections, ctx.ego, ctx.cam, ctx.relations);
    NodeMatch match = match_nodes(g_cam, g_lidar, camera_detections, lidar_detections,
                                  ctx.cam, ctx.match_threshold);
    return {cross_check(g_cam, g_lidar, match, VocabMap::defaults())};
}

// Original inconsistent edges plus, for lidar-side ones, the camera edges
// they contradicted (a repaired lidar edge counts as resolved when all of its
// camera contradictors turned consistent).
struct InconsistencyLedger {
    std::vector<GraphEdge> camera_edges;
    std::vector<std::pair<GraphEdge, std::vector<GraphEdge>>> lidar_edges;

    std::size_t size() const { return camera_edges.size() + lidar_edges.size(); }

    double resolved_fraction(const ConsistencyReport& repaired) const {
        if (size() == 0) return 0.0;
        std::size_t resolved = 0;
        for (const GraphEdge& e : camera_edges) {
            auto it = repaired.camera_edge_labels.find(e);
            if (it != repaired.camera_edge_labels.end() && it->second == Label::consistent) {
                ++resolved;
            }
        }
        for (const auto& [edge, contradictors] : lidar_edges) {
            bool all_ok = !contradictors.empty();
            for (const GraphEdge& ce : contradictors) {
                auto it = repaired.camera_edge_labels.find(ce);
                if (it == repaired.camera_edge_labels.end() ||
                    it->second != Label::consistent) {
                    all_ok = false;
                    break;
                }
            }
            if (all_ok) ++resolved;
        }
        return static_cast<double>(resolved) / static_cast<double>(size());
    }
};

}  // namespace

std::vector<PerturbationHypothesis> hypothesize_perturbation(
    const ConsistencyReport& report, const SceneGraph& g_cam,
    const SceneGraph& g_lidar, const std::vector<Detection>& camera_detections,
    const std::vector<Detection>& lidar_detections, const AttackConstraints& c,
    const IntegrityContext& ctx) {
    if (report.inconsistent_count() == 0) return {};

    NodeMatch match = match_nodes(g_cam, g_lidar, camera_detections, lidar_detections,
                                  ctx.cam, ctx.match_threshold);

    std::map<std::string, std::string> lidar_to_cam;
    for (const auto& pr : match.pairs) {
        lidar_to_cam[pr.lidar_id] = pr.camera_id;
    }

    std::set<GraphEdge> cam_exp = expand_graph(g_cam).edge_set();
    InconsistencyLedger ledger;
    for (const auto& [edge, label] : report.camera_edge_labels) {
        if (label == Label::inconsistent) ledger.camera_edges.push_back(edge);
    }
    for (const auto& [edge, label] : report.lidar_edge_labels) {
        if (label != Label::inconsistent) continue;
        auto sit = lidar_to_cam.find(edge.subject);
        auto oit = lidar_to_cam.find(edge.object);
        std::vector<GraphEdge> contradictors;
        if (sit != lidar_to_cam.end() && oit != lidar_to_cam.end()) {
            contradictors =
                lidar_edge_verdict(edge, sit->second, oit->second, cam_exp, g_cam)
                    .contradicts;
        }
        ledger.lidar_edges.push_back({edge, contradictors});
    }
    if (ledger.size() == 0) return {};

    auto find_det_index = [](const std::vector<Detection>& dets, const std::string& id) {
        for (std::size_t i = 0; i < dets.size(); ++i) {
            if (dets[i].id == id) return static_cast<std::ptrdiff_t>(i);
        }
        return static_cast<std::ptrdiff_t>(-1);
    };

    std::vector<PerturbationHypothesis> hypotheses;

    for (const GraphNode& node : g_lidar.nodes) {
        if (!report.node_inconsistent(Sensor::lidar, node.id)) continue;
        std::ptrdiff_t idx = find_det_index(lidar_detections, node.id);
        if (idx < 0) continue;
        const Detection& suspect = lidar_detections[static_cast<std::size_t>(idx)];
        const Box3D& observed = suspect.box_3d();

        // False positive: remove the node outright.
        {
            std::vector<Detection> repaired = lidar_detections;
            repaired.erase(repaired.begin() + idx);
            RepairOutcome outcome =
                evaluate_repair(g_cam, camera_detections, repaired, ctx);
            PerturbationHypothesis h;
            h.suspect = node.id;
            h.kind = HypothesisKind::false_positive;
            h.score = ledger.resolved_fraction(outcome.report);
            hypotheses.push_back(h);
        }

        // Translation along the node's frustum axis, when the observed box
        // could be a stealthy translation at all.
        auto partner_it = lidar_to_cam.find(node.id);
        auto axis = frustum_axis(observed, ctx.cam);
        if (partner_it == lidar_to_cam.end() || !axis) continue;
        if (observed.volume() < c.v_min || observed.volume() > c.v_max) continue;
        std::ptrdiff_t cam_idx = find_det_index(camera_detections, partner_it->second);
        if (cam_idx < 0) continue;
        const Box2D& partner_box =
            camera_detections[static_cast<std::size_t>(cam_idx)].box_2d();

        // The hypothesized true dims are observed / s with s constrained so
        // the true object stays class-plausible.
        const ClassPrior& prior = ctx.priors.of(node.cls);
        Dims lo = prior.lo();
        Dims hi = prior.hi();
        double s_lo = std::max({observed.dims.h / hi.h, observed.dims.w / hi.w,
                                observed.dims.l / hi.l});
        double s_hi = std::min({observed.dims.h / lo.h, observed.dims.w / lo.w,
                                observed.dims.l / lo.l});
        if (s_lo > s_hi) continue;

        double range_obs = (observed.center - ctx.cam.extrinsic.position).norm();
        struct Candidate {
            double tau;
            double score;
        };
        std::vector<Candidate> scored;
        for (double r = std::max(1.0, ctx.grid_step_m); r <= ctx.max_depth_m;
             r += ctx.grid_step_m) {
            double tau = range_obs - r;
            if (std::abs(tau) < ctx.grid_step_m / 2.0) continue;
            Vec3 true_center = ctx.cam.extrinsic.position + *axis * r;
            double iou = 0.0;
            // Inverse scale: candidate dims = observed / s.
            double inv_hi = 1.0 / s_lo;
            double inv_lo = 1.0 / s_hi;
            Box3D probe(true_center, observed.dims, observed.yaw);
            double inv = fit_projection_scale(probe, partner_box, ctx.cam, inv_lo,
                                              inv_hi, &iou);
            if (iou < ctx.match_threshold) continue;
            Dims true_dims{observed.dims.h * inv, observed.dims.w * inv,
                           observed.dims.l * inv};
            std::vector<Detection> repaired = lidar_detections;
            repaired[static_cast<std::size_t>(idx)].box3 =
                Box3D(true_center, true_dims, observed.yaw);
            RepairOutcome outcome =
                evaluate_repair(g_cam, camera_detections, repaired, ctx);
            scored.push_back({tau, ledger.resolved_fraction(outcome.report)});
        }
        if (!scored.empty()) {
            std::size_t best = 0;
            for (std::size_t i = 1; i < scored.size(); ++i) {
                if (scored[i].score > scored[best].score) best = i;
            }
            // Relation-flip band: the contiguous max-score run containing the
            // best candidate, padded by one grid step of resolution.
            std::size_t first = best;
            std::size_t last = best;
            while (first > 0 && scored[first - 1].score >= scored[best].score - 1e-12 &&
                   std::abs(scored[first - 1].tau - scored[first].tau) <
                       1.5 * ctx.grid_step_m) {
                --first;
            }
            while (last + 1 < scored.size() &&
                   scored[last + 1].score >= scored[best].score - 1e-12 &&
                   std::abs(scored[last + 1].tau - scored[last].tau) <
                       1.5 * ctx.grid_step_m) {
                ++last;
            }
            PerturbationHypothesis h;
            h.suspect = node.id;
            h.kind = HypothesisKind::translation_along_ray;
            h.score = scored[best].score;
            h.displacement_m = scored[best].tau;
            // tau decreases as the candidate range grows.
            h.displacement_lo = scored[last].tau - ctx.grid_step_m;
            h.displacement_hi = scored[first].tau + ctx.grid_step_m;
            hypotheses.push_back(h);
        }
    }

    // Missing-detection hypotheses for unmatched camera nodes.
    for (const std::string& cam_id : match.unmatched_camera) {
        std::ptrdiff_t cam_idx = find_det_index(camera_detections, cam_id);
        if (cam_idx < 0) continue;
        const Detection& det = camera_detections[static_cast<std::size_t>(cam_idx)];
        MonocularEstimate est = monocular_estimate(det, ctx.cam, ctx.priors);
        Dims dims = ctx.priors.of(det.cls).nominal;
        Vec3 center = est.position;
        center.z() = dims.h / 2.0;
        std::vector<Detection> repaired = lidar_detections;
        repaired.push_back(Detection::lidar("FN_" + cam_id, det.cls,
                                            Box3D(center, dims, ctx.ego.yaw), 1.0,
                                            std::nullopt, std::nullopt));
        RepairOutcome outcome = evaluate_repair(g_cam, camera_detections, repaired, ctx);
        PerturbationHypothesis h;
        h.suspect = cam_id;
        h.kind = HypothesisKind::false_negative;
        h.score = ledger.resolved_fraction(outcome.report);
        hypotheses.push_back(h);
    }

    std::stable_sort(hypotheses.begin(), hypotheses.end(),
                     [](const PerturbationHypothesis& a, const PerturbationHypothesis& b) {
                         if (a.score != b.score) return a.score > b.score;
                         if (a.suspect != b.suspect) return a.suspect < b.suspect;
                         return static_cast<int>(a.kind) < static_cast<int>(b.kind);
                     });
    return hypotheses;
}

}  // namespace sgsim

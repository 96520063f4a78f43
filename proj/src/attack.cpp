#include "sgsim/attack.hpp"

#include "sgsim/errors.hpp"
#include "sgsim/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace sgsim {

void AttackConstraints::validate() const {
    if (!(v_min > 0.0) || !(v_min <= v_max)) {
        throw ConfigError("attack constraints: need 0 < v_min <= v_max");
    }
    if (!(zeta_min > 0.0) || !(zeta_min <= 1.0)) {
        throw ConfigError("attack constraints: zeta_min must be in (0,1]");
    }
    if (dim_min.h > dim_max.h || dim_min.w > dim_max.w || dim_min.l > dim_max.l ||
        dim_min.h <= 0.0 || dim_min.w <= 0.0 || dim_min.l <= 0.0) {
        throw ConfigError("attack constraints: invalid dim bounds");
    }
}

std::string to_string(AttackKind kind) {
    switch (kind) {
        case AttackKind::frustum_translate: return "frustum_translate";
        case AttackKind::false_positive: return "false_positive";
        case AttackKind::false_negative: return "false_negative";
    }
    return "frustum_translate";
}

std::optional<AttackKind> attack_kind_from_string(const std::string& name) {
    for (AttackKind k : {AttackKind::frustum_translate, AttackKind::false_positive,
                         AttackKind::false_negative}) {
        if (to_string(k) == name) return k;
    }
    return std::nullopt;
}

namespace {

struct Instance {
    Box3D box0;
    Box2D target2d;
    const CameraModel* cam;
    Vec3 axis;
    double s_lo;
    double s_hi;
    double zeta;
};

Box3D candidate_box(const Instance& inst, double t, double s) {
    Dims d{inst.box0.dims.h * s, inst.box0.dims.w * s, inst.box0.dims.l * s};
    return Box3D(inst.box0.center + t * inst.axis, d, inst.box0.yaw);
}

// IoU of the candidate's projection against the target 2D box; negative when
// the candidate does not project.
double iou_at(const Instance& inst, double t, double s) {
    Projection proj = project_box(candidate_box(inst, t, s), *inst.cam);
    if (!proj.ok()) return -1.0;
    return iou_2d(inst.target2d, proj.box);
}

// Maximizes IoU over the scale range at fixed translation. The objective is
// unimodal in s (the projected box grows through the target size and past
// it), so golden-section plus explicit endpoint/unit probes suffices.
std::pair<double, double> best_scale(const Instance& inst, double t) {
    double lo = inst.s_lo;
    double hi = inst.s_hi;
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - phi * (hi - lo);
    double x2 = lo + phi * (hi - lo);
    double f1 = iou_at(inst, t, x1);
    double f2 = iou_at(inst, t, x2);
    for (int it = 0; it < 60 && hi - lo > 1e-10; ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = iou_at(inst, t, x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = iou_at(inst, t, x1);
        }
    }
    double best_s = (lo + hi) / 2.0;
    double best_iou = iou_at(inst, t, best_s);
    for (double s : {inst.s_lo, inst.s_hi, 1.0}) {
        if (s < inst.s_lo || s > inst.s_hi) continue;
        double v = iou_at(inst, t, s);
        if (v > best_iou) {
            best_iou = v;
            best_s = s;
        }
    }
    return {best_s, best_iou};
}

}  // namespace

double fit_projection_scale(const Box3D& box, const Box2D& target,
                            const CameraModel& cam, double s_lo, double s_hi,
                            double* iou_out) {
    Instance inst;
    inst.box0 = box;
    inst.target2d = target;
    inst.cam = &cam;
    inst.axis = Vec3{1.0, 0.0, 0.0};  // unused at t = 0
    inst.s_lo = s_lo;
    inst.s_hi = s_hi;
    inst.zeta = 0.0;
    auto [s, iou] = best_scale(inst, 0.0);
    if (iou_out) *iou_out = iou;
    return s;
}

namespace {

Instance make_instance(const Detection& d3d, const Detection& d2d,
                       const CameraModel& cam, const AttackConstraints& c) {
    c.validate();
    Instance inst;
    inst.box0 = d3d.box_3d();
    inst.target2d = d2d.box_2d();
    inst.cam = &cam;
    inst.zeta = c.zeta_min;
    auto axis = frustum_axis(inst.box0, cam);
    if (!axis) {
        throw Infeasible("attack target center is behind the camera");
    }
    inst.axis = *axis;

    const Dims& d0 = inst.box0.dims;
    double v0 = d0.volume();
    inst.s_lo = std::max({std::cbrt(c.v_min / v0), c.dim_min.h / d0.h,
                          c.dim_min.w / d0.w, c.dim_min.l / d0.l});
    inst.s_hi = std::min({std::cbrt(c.v_max / v0), c.dim_max.h / d0.h,
                          c.dim_max.w / d0.w, c.dim_max.l / d0.l});
    if (inst.s_lo > inst.s_hi) {
        throw Infeasible("no dimension scale satisfies the volume and dim bounds");
    }
    return inst;
}

// Forward cap on the backward translation: beyond this the projected box is
// provably smaller than zeta_min times the target in linear size.
double backward_cap(const Instance& inst) {
    double depth0 = inst.cam->depth_of(inst.box0.center);
    return depth0 * (inst.s_hi / inst.zeta + 1.0) + 20.0 * inst.s_hi;
}

AttackResult make_result(const std::string& id, const Instance& inst, double t,
                         double s, double iou) {
    AttackResult r;
    r.target_id = id;
    r.original_box = inst.box0;
    r.attacked_box = candidate_box(inst, t, s);
    r.displacement_m = (r.attacked_box.center - inst.box0.center).norm();
    r.achieved_iou = iou;
    r.scale = s;
    return r;
}

}  // namespace

AttackResult optimal_frustum_attack(const Detection& d3d, const Detection& d2d,
                                    const CameraModel& cam,
                                    const AttackConstraints& c) {
    Instance inst = make_instance(d3d, d2d, cam, c);

    auto [s0, iou0] = best_scale(inst, 0.0);
    if (iou0 < inst.zeta) {
        throw Infeasible("zero displacement already violates the IoU constraint");
    }

    double depth0 = cam.depth_of(inst.box0.center);
    double t_best = 0.0;
    double s_best = s0;
    double iou_best = iou0;

    // dir +1: backward (away from the camera); dir -1: forward.
    for (double dir : {1.0, -1.0}) {
        double limit = dir > 0 ? backward_cap(inst) : depth0 - 0.25;
        if (limit <= 0.0) continue;

        // Coarse walk to bracket the feasibility boundary.
        double t_feasible = 0.0;
        double s_at = s0;
        double iou_at_feasible = iou0;
        double t_infeasible = -1.0;
        for (double t = 1.0; t <= limit + 1.0; t += 1.0) {
            double tt = std::min(t, limit);
            auto [s, iou] = best_scale(inst, dir * tt);
            if (iou >= inst.zeta) {
                t_feasible = tt;
                s_at = s;
                iou_at_feasible = iou;
                if (tt >= limit) break;
            } else {
                t_infeasible = tt;
                break;
            }
        }
        if (t_infeasible > 0.0) {
            // Bisect the bracket down to 5 mm, keeping the best feasible point.
            double lo = t_feasible;
            double hi = t_infeasible;
            while (hi - lo > 0.005) {
                double mid = (lo + hi) / 2.0;
                auto [s, iou] = best_scale(inst, dir * mid);
                if (iou >= inst.zeta) {
                    lo = mid;
                    s_at = s;
                    iou_at_feasible = iou;
                } else {
                    hi = mid;
                }
            }
            t_feasible = lo;
        }
        if (t_feasible > std::abs(t_best)) {
            t_best = dir * t_feasible;
            s_best = s_at;
            iou_best = iou_at_feasible;
        }
    }
    return make_result(d3d.id, inst, t_best, s_best, iou_best);
}

AttackResult frustum_attack_oracle(const Detection& d3d, const Detection& d2d,
                                   const CameraModel& cam,
                                   const AttackConstraints& c,
                                   const GridSpec& grid) {
    Instance inst = make_instance(d3d, d2d, cam, c);

    // Scale grid; the bounds and s = 1 are always included so boundary-bound
    // optima and the identity scale are exactly representable.
    std::vector<double> scales;
    for (double s = inst.s_lo; s < inst.s_hi; s += grid.s_step) scales.push_back(s);
    scales.push_back(inst.s_hi);
    if (1.0 >= inst.s_lo && 1.0 <= inst.s_hi) scales.push_back(1.0);
    std::sort(scales.begin(), scales.end());

    double depth0 = cam.depth_of(inst.box0.center);
    bool found = false;
    double t_best = 0.0;
    double s_best = 1.0;
    double iou_best = -1.0;

    auto probe = [&](double t) {
        double local_best_iou = -1.0;
        double local_best_s = 1.0;
        for (double s : scales) {
            double iou = iou_at(inst, t, s);
            if (iou > local_best_iou) {
                local_best_iou = iou;
                local_best_s = s;
            }
        }
        if (local_best_iou >= inst.zeta) {
            if (!found || std::abs(t) > std::abs(t_best)) {
                found = true;
                t_best = t;
                s_best = local_best_s;
                iou_best = local_best_iou;
            }
        }
    };

    double cap = backward_cap(inst);
    for (double t = 0.0; t <= cap; t += grid.t_step) probe(t);
    for (double t = -grid.t_step; t >= -(depth0 - 0.25); t -= grid.t_step) probe(t);

    if (!found) {
        throw Infeasible("no feasible grid point (zero displacement included)");
    }
    return make_result(d3d.id, inst, t_best, s_best, iou_best);
}

std::pair<std::vector<Detection>, std::optional<AttackResult>> apply_attack(
    const std::vector<Detection>& detections, const AttackSpec& spec,
    const AttackContext& ctx) {
    std::vector<Detection> out = detections;

    auto find_target = [&]() {
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (out[i].id == spec.target_id) return i;
        }
        throw UnknownTarget("no detection with id \"" + spec.target_id + "\"");
    };

    switch (spec.kind) {
        case AttackKind::false_negative: {
            std::size_t idx = find_target();
            out.erase(out.begin() + static_cast<std::ptrdiff_t>(idx));
            return {out, std::nullopt};
        }
        case AttackKind::false_positive: {
            if (!spec.spawn) throw ConfigError("false_positive attack needs spawn parameters");
            const SpawnParams& sp = *spec.spawn;
            Dims dims = ClassPriorTable::defaults().of(sp.cls).nominal;
            Box3D box({sp.x, sp.y, dims.h / 2.0}, dims, sp.yaw);
            int n = 0;
            std::string id = "FP0";
            auto taken = [&](const std::string& cand) {
                for (const Detection& d : out) {
                    if (d.id == cand) return true;
                }
                return false;
            };
            while (taken(id)) id = "FP" + std::to_string(++n);
            out.push_back(Detection::lidar(id, sp.cls, box, 1.0, std::nullopt, std::nullopt));
            return {out, std::nullopt};
        }
        case AttackKind::frustum_translate: {
            std::size_t idx = find_target();
            CostMatrix m = build_cost_matrix(ctx.camera_detections, out, ctx.cam);
            Assignment assignment = solve_assignment(m, ctx.assignment_gate);
            const Detection* partner = nullptr;
            for (const auto& pr : assignment.pairs) {
                if (pr.col == static_cast<int>(idx)) {
                    partner = &ctx.camera_detections[static_cast<std::size_t>(pr.row)];
                    break;
                }
            }
            if (!partner) {
                throw Infeasible("attack target has no 2D assignment partner to stay stealthy against");
            }
            AttackResult result =
                optimal_frustum_attack(out[idx], *partner, ctx.cam, spec.constraints);
            out[idx].box3 = result.attacked_box;
            return {out, result};
        }
    }
    throw ConfigError("unknown attack kind");
}

}  // namespace sgsim

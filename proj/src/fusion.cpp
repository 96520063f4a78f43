#include "sgsim/fusion.hpp"

#include "sgsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sgsim {

CostMatrix build_cost_matrix(const std::vector<Detection>& d2d,
                             const std::vector<Detection>& d3d,
                             const CameraModel& cam) {
    CostMatrix m(static_cast<int>(d2d.size()), static_cast<int>(d3d.size()));
    for (int i = 0; i < m.rows; ++i) {
        const Box2D& box2 = d2d[static_cast<std::size_t>(i)].box_2d();
        for (int j = 0; j < m.cols; ++j) {
            Projection proj = project_box(d3d[static_cast<std::size_t>(j)].box_3d(), cam);
            m.at(i, j) = proj.ok() ? iou_2d(box2, proj.box) : 0.0;
        }
    }
    return m;
}

namespace {

// Kuhn-Munkres (shortest augmenting path form) on a square cost matrix,
// minimization. Returns row -> col.
std::vector<int> solve_square(const std::vector<std::vector<double>>& cost) {
    int n = static_cast<int>(cost.size());
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<int> p(static_cast<std::size_t>(n) + 1, 0);
    std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n) + 1,
                                 std::numeric_limits<double>::infinity());
        std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            int i0 = p[static_cast<std::size_t>(j0)];
            int j1 = 0;
            double delta = std::numeric_limits<double>::infinity();
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                double cur = cost[static_cast<std::size_t>(i0 - 1)][static_cast<std::size_t>(j - 1)] -
                             u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            int j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> rowsol(static_cast<std::size_t>(n), -1);
    for (int j = 1; j <= n; ++j) {
        if (p[static_cast<std::size_t>(j)] > 0) {
            rowsol[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
        }
    }
    return rowsol;
}

// Max total affinity over bijections restricted to the unused rows/cols.
// Pads to square with zero-affinity dummies.
double best_total(const CostMatrix& a, const std::vector<char>& row_used,
                  const std::vector<char>& col_used,
                  std::vector<std::pair<int, int>>* out_pairs) {
    std::vector<int> rows;
    std::vector<int> cols;
    for (int i = 0; i < a.rows; ++i) {
        if (!row_used[static_cast<std::size_t>(i)]) rows.push_back(i);
    }
    for (int j = 0; j < a.cols; ++j) {
        if (!col_used[static_cast<std::size_t>(j)]) cols.push_back(j);
    }
    if (out_pairs) out_pairs->clear();
    if (rows.empty() || cols.empty()) return 0.0;

    std::size_t n = std::max(rows.size(), cols.size());
    std::vector<std::vector<double>> cost(n, std::vector<double>(n, 1.0));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            cost[i][j] = 1.0 - a.at(rows[i], cols[j]);
        }
    }
    std::vector<int> rowsol = solve_square(cost);
    double total = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        int j = rowsol[i];
        if (j >= 0 && static_cast<std::size_t>(j) < cols.size()) {
            total += a.at(rows[i], cols[static_cast<std::size_t>(j)]);
            if (out_pairs) out_pairs->push_back({rows[i], cols[static_cast<std::size_t>(j)]});
        }
    }
    return total;
}

constexpr double kTieEps = 1e-9;

}  // namespace

Assignment solve_assignment(const CostMatrix& a, double gate) {
    if (gate < 0.0 || gate > 1.0) throw ConfigError("assignment gate must be in [0,1]");

    std::vector<char> row_used(static_cast<std::size_t>(a.rows), 0);
    std::vector<char> col_used(static_cast<std::size_t>(a.cols), 0);
    double optimum = best_total(a, row_used, col_used, nullptr);

    // Fix pairs in lexicographic (i, j) order whenever doing so still admits
    // an optimal-total completion; this makes ties deterministic.
    Assignment out;
    double remaining = optimum;
    for (int i = 0; i < a.rows; ++i) {
        bool fixed = false;
        for (int j = 0; j < a.cols && !fixed; ++j) {
            if (col_used[static_cast<std::size_t>(j)]) continue;
            row_used[static_cast<std::size_t>(i)] = 1;
            col_used[static_cast<std::size_t>(j)] = 1;
            double rest = best_total(a, row_used, col_used, nullptr);
            if (a.at(i, j) + rest >= remaining - kTieEps) {
                out.pairs.push_back({i, j, a.at(i, j)});
                remaining -= a.at(i, j);
                fixed = true;
            } else {
                row_used[static_cast<std::size_t>(i)] = 0;
                col_used[static_cast<std::size_t>(j)] = 0;
            }
        }
        if (!fixed) row_used[static_cast<std::size_t>(i)] = 1;  // row stays unmatched
    }

    // Gate filtering happens after the solve.
    std::vector<Assignment::Pair> kept;
    for (const auto& pr : out.pairs) {
        if (pr.affinity >= gate) kept.push_back(pr);
    }
    out.pairs = kept;

    std::vector<char> row_matched(static_cast<std::size_t>(a.rows), 0);
    std::vector<char> col_matched(static_cast<std::size_t>(a.cols), 0);
    out.total_affinity = 0.0;
    for (const auto& pr : out.pairs) {
        row_matched[static_cast<std::size_t>(pr.row)] = 1;
        col_matched[static_cast<std::size_t>(pr.col)] = 1;
        out.total_affinity += pr.affinity;
    }
    for (int i = 0; i < a.rows; ++i) {
        if (!row_matched[static_cast<std::size_t>(i)]) out.unmatched_rows.push_back(i);
    }
    for (int j = 0; j < a.cols; ++j) {
        if (!col_matched[static_cast<std::size_t>(j)]) out.unmatched_cols.push_back(j);
    }
    return out;
}

namespace {

Label worst_label(Label a, Label b) {
    if (a == Label::inconsistent || b == Label::inconsistent) return Label::inconsistent;
    if (a == Label::unknown || b == Label::unknown) return Label::unknown;
    return Label::consistent;
}

double weight_of(Label label) {
    switch (label) {
        case Label::consistent: return 1.0;
        case Label::unknown: return 0.5;
        case Label::inconsistent: return 0.0;
    }
    return 0.5;
}

}  // namespace

std::vector<FusedObject> graph_informed_fuse(const Assignment& assignment,
                                             const std::vector<Detection>& d2d,
                                             const std::vector<Detection>& d3d,
                                             const ConsistencyReport& report,
                                             const CameraModel& cam,
                                             const ClassPriorTable& priors) {
    for (const Detection& d : d2d) {
        if (!report.camera_node_labels.count(d.id)) {
            throw ReportMismatch("report does not cover camera detection " + d.id);
        }
    }
    for (const Detection& d : d3d) {
        if (!report.lidar_node_labels.count(d.id)) {
            throw ReportMismatch("report does not cover lidar detection " + d.id);
        }
    }

    auto hypotheses_for = [&](const std::string& id) {
        std::vector<PerturbationHypothesis> out;
        for (const PerturbationHypothesis& h : report.hypotheses) {
            if (h.suspect == id) out.push_back(h);
        }
        return out;
    };

    std::vector<FusedObject> fused;
    for (const auto& pr : assignment.pairs) {
        const Detection& c2 = d2d[static_cast<std::size_t>(pr.row)];
        const Detection& l3 = d3d[static_cast<std::size_t>(pr.col)];
        Label label = worst_label(report.camera_node_labels.at(c2.id),
                                  report.lidar_node_labels.at(l3.id));
        FusedObject obj;
        obj.position = l3.box_3d().center;
        obj.cls = l3.cls;
        obj.camera_id = c2.id;
        obj.lidar_id = l3.id;
        obj.weight = weight_of(label);
        obj.flagged = label == Label::inconsistent;
        if (obj.flagged) obj.hypotheses = hypotheses_for(l3.id);
        fused.push_back(std::move(obj));
    }
    for (int j : assignment.unmatched_cols) {
        const Detection& l3 = d3d[static_cast<std::size_t>(j)];
        FusedObject obj;
        obj.position = l3.box_3d().center;
        obj.cls = l3.cls;
        obj.lidar_id = l3.id;
        obj.weight = 0.5;
        fused.push_back(std::move(obj));
    }
    for (int i : assignment.unmatched_rows) {
        const Detection& c2 = d2d[static_cast<std::size_t>(i)];
        FusedObject obj;
        obj.position = monocular_estimate(c2, cam, priors).position;
        obj.cls = c2.cls;
        obj.camera_id = c2.id;
        obj.weight = 0.5;
        obj.camera_only = true;
        obj.hypotheses = hypotheses_for(c2.id);
        fused.push_back(std::move(obj));
    }
    return fused;
}

}  // namespace sgsim

#pragma once

#include "sgsim/integrity.hpp"
#include "sgsim/scene.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sgsim {

// Affinity matrix for 2D-3D association: rows are camera detections, columns
// lidar detections, entries in [0,1]. The convention is affinity (higher is
// better); the solver maximizes total affinity, equivalent to minimizing
// cost 1 - A.
struct CostMatrix {
    int rows{0};
    int cols{0};
    std::vector<double> a;

    CostMatrix() = default;
    CostMatrix(int rows_, int cols_) : rows(rows_), cols(cols_),
                                       a(static_cast<std::size_t>(rows_ * cols_), 0.0) {}
    double& at(int i, int j) { return a[static_cast<std::size_t>(i * cols + j)]; }
    double at(int i, int j) const { return a[static_cast<std::size_t>(i * cols + j)]; }
};

// A[i,j] = iou_2d(d2d[i], project(d3d[j])); projection failures yield 0.
CostMatrix build_cost_matrix(const std::vector<Detection>& d2d,
                             const std::vector<Detection>& d3d,
                             const CameraModel& cam);

struct Assignment {
    struct Pair {
        int row;
        int col;
        double affinity;
    };
    std::vector<Pair> pairs;           // sorted by row
    std::vector<int> unmatched_rows;
    std::vector<int> unmatched_cols;
    double total_affinity{0.0};        // sum over pairs, in row order
};

// Optimal linear-sum assignment maximizing total affinity, then gate
// filtering: matched pairs with affinity < gate are reported unmatched.
// Among equally optimal assignments the lexicographically lowest (i, j)
// pair set is returned.
Assignment solve_assignment(const CostMatrix& a, double gate);

// One fused track-level object. Weight schedule: 1 consistent, 0.5 unknown,
// 0 inconsistent (flagged). Unmatched lidar detections become weight-0.5
// singletons; unmatched camera detections become camera-only stubs at their
// monocular pseudo-position.
struct FusedObject {
    Vec3 position{0.0, 0.0, 0.0};
    ObjectClass cls{ObjectClass::car};
    std::optional<std::string> camera_id;
    std::optional<std::string> lidar_id;
    double weight{1.0};
    bool flagged{false};
    bool camera_only{false};
    std::vector<PerturbationHypothesis> hypotheses;
};

// Throws ReportMismatch when the report's node labels do not cover the
// detections' ids.
std::vector<FusedObject> graph_informed_fuse(const Assignment& assignment,
                                             const std::vector<Detection>& d2d,
                                             const std::vector<Detection>& d3d,
                                             const ConsistencyReport& report,
                                             const CameraModel& cam,
                                             const ClassPriorTable& priors);

}  // namespace sgsim

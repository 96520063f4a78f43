#pragma once

#include "sgsim/scene.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sgsim {

// Practical constraints on a manipulated 3D detection. Volume and per-dim
// bounds apply to the perturbed box; zeta_min is the minimum image-plane IoU
// kept against the paired (unattacked) 2D detection. The vertical coordinate
// is not an attack degree of freedom: it is slaved to the frustum ray, so
// near-horizontal rays leave it nearly unchanged. Yaw, pitch and roll are
// never manipulated.
struct AttackConstraints {
    double v_min{0.1};
    double v_max{150.0};
    Dims dim_min{0.3, 0.3, 0.3};
    Dims dim_max{4.5, 4.0, 12.0};
    double zeta_min{0.9};
    bool vertical_locked{true};
    bool yaw_only{true};

    void validate() const;
};

enum class AttackKind { frustum_translate, false_positive, false_negative };

std::string to_string(AttackKind kind);
std::optional<AttackKind> attack_kind_from_string(const std::string& name);

// Spawn parameters for a false-positive insertion: class-prior nominal dims
// at the given ego-frame ground position.
struct SpawnParams {
    ObjectClass cls{ObjectClass::car};
    double x{20.0};
    double y{0.0};
    double yaw{0.0};
};

struct AttackSpec {
    AttackKind kind{AttackKind::frustum_translate};
    std::string target_id;  // frustum_translate / false_negative
    std::optional<SpawnParams> spawn;
    AttackConstraints constraints{};
};

struct AttackResult {
    std::string target_id;
    Box3D original_box{};
    Box3D attacked_box{};
    double displacement_m{0.0};  // || attacked center - original center ||
    double achieved_iou{1.0};    // against the paired 2D box
    double scale{1.0};           // uniform dim scale applied
};

// Resolution of the exhaustive verifier grid.
struct GridSpec {
    double t_step{0.05};  // meters along the frustum axis
    double s_step{0.01};  // uniform dimension scale
};

// Optimal frustum attack: translate the 3D detection along the frustum axis
// through its center, jointly choosing one uniform dimension scale, to
// maximize displacement subject to IoU >= zeta_min against d2d, volume and
// per-dim bounds. Backward and forward translations are both searched; the
// larger feasible displacement wins. Throws Infeasible when even zero
// displacement admits no feasible scale.
AttackResult optimal_frustum_attack(const Detection& d3d, const Detection& d2d,
                                    const CameraModel& cam,
                                    const AttackConstraints& c);

// Independent exhaustive grid search over (translation, scale); ground truth
// for the solver. Same contract as optimal_frustum_attack.
AttackResult frustum_attack_oracle(const Detection& d3d, const Detection& d2d,
                                   const CameraModel& cam,
                                   const AttackConstraints& c,
                                   const GridSpec& grid);

// What apply_attack needs from the surrounding scene: the camera model and
// the unattacked 2D detections (to resolve the target's fusion partner).
struct AttackContext {
    CameraModel cam{};
    std::vector<Detection> camera_detections;
    double assignment_gate{0.3};
};

// Applies one attack spec to a 3D detection list. frustum_translate replaces
// the target's box with the attack optimum (paired against its assignment
// partner); false_negative removes the target; false_positive inserts a
// detection with class-prior dims. Returns the new list plus the AttackResult
// for translations.
std::pair<std::vector<Detection>, std::optional<AttackResult>> apply_attack(
    const std::vector<Detection>& detections, const AttackSpec& spec,
    const AttackContext& ctx);

// Uniform dimension scale in [s_lo, s_hi] whose scaled box (about the fixed
// center) projects closest to `target` by IoU. Returns the scale; the best
// IoU lands in *iou_out when non-null. Shared by the attack's inner search
// and the hypothesis reconstruction.
double fit_projection_scale(const Box3D& box, const Box2D& target,
                            const CameraModel& cam, double s_lo, double s_hi,
                            double* iou_out = nullptr);

}  // namespace sgsim

#pragma once

#include "sgsim/geometry.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sgsim {

enum class ObjectClass { car, van, truck, bicycle, pedestrian };

constexpr std::array<ObjectClass, 5> kAllClasses = {
    ObjectClass::car, ObjectClass::van, ObjectClass::truck,
    ObjectClass::bicycle, ObjectClass::pedestrian};

std::string to_string(ObjectClass cls);
std::optional<ObjectClass> class_from_string(const std::string& name);

// Per-class dimension prior: a nominal (h, w, l) and a symmetric fractional
// spread. Real dims of an object of the class are assumed to lie within
// nominal * [1 - spread, 1 + spread] per dimension.
struct ClassPrior {
    Dims nominal{};
    double spread{0.3};

    Dims lo() const {
        return {nominal.h * (1.0 - spread), nominal.w * (1.0 - spread),
                nominal.l * (1.0 - spread)};
    }
    Dims hi() const {
        return {nominal.h * (1.0 + spread), nominal.w * (1.0 + spread),
                nominal.l * (1.0 + spread)};
    }
    bool contains(const Dims& d, double tol = 1e-9) const;
};

struct ClassPriorTable {
    std::map<ObjectClass, ClassPrior> priors;

    static ClassPriorTable defaults();
    const ClassPrior& of(ObjectClass cls) const;
};

struct SceneObject {
    std::string id;
    ObjectClass cls{ObjectClass::car};
    Box3D box{};
    Vec3 velocity{0.0, 0.0, 0.0};
};

struct Scene {
    Pose ego{};
    CameraModel camera{};
    std::vector<SceneObject> objects;
    std::uint64_t seed{0};
};

enum class Sensor { camera, lidar };

std::string to_string(Sensor sensor);

// A single detection from either sensor. The geometry variant matches the
// sensor: camera detections carry a Box2D, lidar detections a Box3D. Lidar
// detections of tracked (non-clutter) objects also carry the object velocity,
// which feeds the `following` relation.
struct Detection {
    std::string id;
    ObjectClass cls{ObjectClass::car};
    Sensor sensor{Sensor::lidar};
    double confidence{1.0};
    std::optional<std::string> source_object;
    std::optional<Box2D> box2;
    std::optional<Box3D> box3;
    std::optional<Vec3> velocity;

    static Detection camera(std::string id, ObjectClass cls, const Box2D& box,
                            double confidence,
                            std::optional<std::string> source = std::nullopt);
    static Detection lidar(std::string id, ObjectClass cls, const Box3D& box,
                           double confidence,
                           std::optional<std::string> source = std::nullopt,
                           std::optional<Vec3> velocity = std::nullopt);

    const Box2D& box_2d() const;
    const Box3D& box_3d() const;
};

// Error characteristics of the pseudo-detectors.
struct NoiseSpec {
    double position_sigma{0.0};   // meters, per axis
    double dimension_sigma{0.0};  // fraction of each dim
    double pixel_sigma{0.0};      // pixels
    double miss_rate{0.0};
    double clutter_rate{0.0};     // Poisson mean per frame

    void validate() const;
};

// One object slot in a scene template: class, a depth range along ego
// forward, and a lateral lane center with jitter.
struct ObjectTemplate {
    ObjectClass cls{ObjectClass::car};
    double depth_min{5.0};
    double depth_max{60.0};
    double lane{0.0};
    double lateral_jitter{0.3};
};

// Scene-generation parameters (the scene section of a scenario config).
struct SceneSpec {
    Pose ego{};
    CameraModel camera{};
    std::vector<ObjectTemplate> objects;  // explicit mode when non-empty

    // Random mode, used when `objects` is empty.
    int object_count{0};
    std::map<ObjectClass, double> class_weights;
    double depth_min{5.0};
    double depth_max{70.0};
    double lateral_min{-6.0};
    double lateral_max{6.0};

    double dim_jitter{0.3};  // sampling spread, clamped to the class prior
    double speed_min{0.0};
    double speed_max{0.0};
    double visibility_cutoff{0.7};
    int placement_retries{100};
    ClassPriorTable priors = ClassPriorTable::defaults();
};

// Deterministic for a fixed (spec, seed). Objects sit on the ground plane
// (z = 0) and never interpenetrate in bird's-eye view. Throws
// PlacementFailure when rejection sampling exhausts the retry budget.
Scene generate_scene(const SceneSpec& spec, std::uint64_t seed);

// One 3D detection per non-missed object, Gaussian position/dimension noise,
// plus Poisson clutter. Clutter has no source_object and no velocity.
std::vector<Detection> pseudo_detect_lidar(const Scene& scene,
                                           const NoiseSpec& noise,
                                           std::uint64_t seed);

// Projects every visible object, drops ones that fail projection or whose
// occluded fraction (worst single blocker) exceeds the cutoff, then applies
// pixel noise to the 2D box.
std::vector<Detection> pseudo_detect_camera(const Scene& scene,
                                            const NoiseSpec& noise,
                                            std::uint64_t seed,
                                            double visibility_cutoff);

// Fraction of the subject's projected hull covered by the blocker's hull,
// counted only when the blocker's center is nearer the camera; projection
// failures yield 0.
double occlusion_fraction(const Box3D& subject, const Box3D& blocker,
                          const CameraModel& cam);
double occlusion_fraction(const SceneObject& subject, const SceneObject& blocker,
                          const CameraModel& cam);

}  // namespace sgsim

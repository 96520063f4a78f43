#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>

namespace sgsim {

using Vec3 = Eigen::Vector3d;

// Normalizes an angle to (-pi, pi].
double normalize_yaw(double yaw);

// World frame: right-handed, z up. A pose is a position plus a yaw about z;
// pitch and roll are identically zero for everything in this project.
struct Pose {
    Vec3 position{0.0, 0.0, 0.0};
    double yaw{0.0};

    Vec3 forward() const { return {std::cos(yaw), std::sin(yaw), 0.0}; }
    Vec3 left() const { return {-std::sin(yaw), std::cos(yaw), 0.0}; }

    // World point expressed in this pose's frame (x forward, y left, z up).
    Vec3 to_local(const Vec3& world) const;
};

// Box dimensions, always ordered (height, width, length) in meters.
struct Dims {
    double h{1.0};
    double w{1.0};
    double l{1.0};

    double volume() const { return h * w * l; }
};

// Oriented 3D box: center, dims, yaw about the vertical axis. Length runs
// along the yaw direction, width across it, height up.
struct Box3D {
    Vec3 center{0.0, 0.0, 0.0};
    Dims dims{};
    double yaw{0.0};

    Box3D() = default;
    Box3D(const Vec3& center_, const Dims& dims_, double yaw_);

    double volume() const { return dims.volume(); }
    double bottom_z() const { return center.z() - dims.h / 2.0; }
};

// Axis-aligned 2D box in pixels: center (cx, cy) and size (w, h).
struct Box2D {
    double cx{0.0};
    double cy{0.0};
    double w{0.0};
    double h{0.0};

    double area() const { return w * h; }
    double left() const { return cx - w / 2.0; }
    double right() const { return cx + w / 2.0; }
    double top() const { return cy - h / 2.0; }
    double bottom() const { return cy + h / 2.0; }
};

// Pinhole camera, zero distortion. The extrinsic pose places the camera in
// the world; the optical axis is the pose's forward direction, image u runs
// to the camera's right, image v runs down.
struct CameraModel {
    double fu{1000.0};
    double fv{1000.0};
    double cu{960.0};
    double cv{540.0};
    double width{1920.0};
    double height{1080.0};
    Pose extrinsic{};

    CameraModel() = default;
    CameraModel(double fu_, double fv_, double cu_, double cv_, double width_,
                double height_, const Pose& extrinsic_);

    // Depth of a world point along the optical axis.
    double depth_of(const Vec3& world) const;

    // Pixel coordinates of a world point; caller must ensure positive depth.
    Eigen::Vector2d pixel_of(const Vec3& world) const;
};

// The eight vertices of the yaw-rotated cuboid. Corner order is fixed:
// bit 0 selects +/- length, bit 1 +/- width, bit 2 +/- height.
std::array<Vec3, 8> corners_3d(const Box3D& box);

enum class ProjectStatus { ok, behind_camera, out_of_view };

// Result of projecting a 3D box; `box` is valid only when status == ok.
struct Projection {
    ProjectStatus status{ProjectStatus::ok};
    Box2D box{};

    bool ok() const { return status == ProjectStatus::ok; }
};

// Axis-aligned hull of the eight projected corners, clipped to the image
// rectangle. behind_camera if any corner has depth <= 0; out_of_view if the
// clipped hull has zero area.
Projection project_box(const Box3D& box, const CameraModel& cam);

// Intersection over union of two axis-aligned pixel boxes; 0 when the union
// has zero area.
double iou_2d(const Box2D& a, const Box2D& b);

// Unit direction from the camera center through the box center, in world
// coordinates. Translating the box along this ray keeps its projected center
// pixel fixed. nullopt when the center is behind the camera or coincides
// with it.
std::optional<Vec3> frustum_axis(const Box3D& box, const CameraModel& cam);

}  // namespace sgsim

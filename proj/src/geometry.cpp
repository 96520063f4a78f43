#include "sgsim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sgsim {

double normalize_yaw(double yaw) {
    double y = std::fmod(yaw, 2.0 * M_PI);
    if (y <= -M_PI) y += 2.0 * M_PI;
    if (y > M_PI) y -= 2.0 * M_PI;
    return y;
}

Vec3 Pose::to_local(const Vec3& world) const {
    Vec3 d = world - position;
    double c = std::cos(yaw);
    double s = std::sin(yaw);
    return {c * d.x() + s * d.y(), -s * d.x() + c * d.y(), d.z()};
}

Box3D::Box3D(const Vec3& center_, const Dims& dims_, double yaw_)
    : center(center_), dims(dims_), yaw(normalize_yaw(yaw_)) {
    if (!(dims.h > 0.0) || !(dims.w > 0.0) || !(dims.l > 0.0) ||
        !std::isfinite(dims.volume())) {
        throw std::invalid_argument("Box3D dims must be positive and finite");
    }
}

CameraModel::CameraModel(double fu_, double fv_, double cu_, double cv_,
                         double width_, double height_, const Pose& extrinsic_)
    : fu(fu_), fv(fv_), cu(cu_), cv(cv_), width(width_), height(height_),
      extrinsic(extrinsic_) {
    if (!(fu > 0.0) || !(fv > 0.0)) {
        throw std::invalid_argument("camera focal lengths must be positive");
    }
    if (cu < 0.0 || cu > width || cv < 0.0 || cv > height) {
        throw std::invalid_argument("camera principal point outside image");
    }
}

double CameraModel::depth_of(const Vec3& world) const {
    return (world - extrinsic.position).dot(extrinsic.forward());
}

Eigen::Vector2d CameraModel::pixel_of(const Vec3& world) const {
    Vec3 d = world - extrinsic.position;
    double depth = d.dot(extrinsic.forward());
    // Camera right = forward x up; down = -z for a yaw-only pose.
    Vec3 right{std::sin(extrinsic.yaw), -std::cos(extrinsic.yaw), 0.0};
    double u = fu * d.dot(right) / depth + cu;
    double v = fv * (-d.z()) / depth + cv;
    return {u, v};
}

std::array<Vec3, 8> corners_3d(const Box3D& box) {
    double c = std::cos(box.yaw);
    double s = std::sin(box.yaw);
    double hl = box.dims.l / 2.0;
    double hw = box.dims.w / 2.0;
    double hh = box.dims.h / 2.0;
    std::array<Vec3, 8> out;
    for (int i = 0; i < 8; ++i) {
        double lx = (i & 1) ? hl : -hl;
        double ly = (i & 2) ? hw : -hw;
        double lz = (i & 4) ? hh : -hh;
        out[i] = box.center + Vec3{c * lx - s * ly, s * lx + c * ly, lz};
    }
    return out;
}

Projection project_box(const Box3D& box, const CameraModel& cam) {
    auto corners = corners_3d(box);
    double umin = std::numeric_limits<double>::infinity();
    double umax = -umin;
    double vmin = umin;
    double vmax = -umin;
    for (const Vec3& corner : corners) {
        if (cam.depth_of(corner) <= 0.0) {
            return {ProjectStatus::behind_camera, {}};
        }
        Eigen::Vector2d px = cam.pixel_of(corner);
        umin = std::min(umin, px.x());
        umax = std::max(umax, px.x());
        vmin = std::min(vmin, px.y());
        vmax = std::max(vmax, px.y());
    }
    umin = std::max(umin, 0.0);
    vmin = std::max(vmin, 0.0);
    umax = std::min(umax, cam.width);
    vmax = std::min(vmax, cam.height);
    if (umax <= umin || vmax <= vmin) {
        return {ProjectStatus::out_of_view, {}};
    }
    Box2D hull{(umin + umax) / 2.0, (vmin + vmax) / 2.0, umax - umin, vmax - vmin};
    return {ProjectStatus::ok, hull};
}

double iou_2d(const Box2D& a, const Box2D& b) {
    double aw = std::max(a.w, 0.0);
    double ah = std::max(a.h, 0.0);
    double bw = std::max(b.w, 0.0);
    double bh = std::max(b.h, 0.0);
    double ix = std::min(a.cx + aw / 2.0, b.cx + bw / 2.0) -
                std::max(a.cx - aw / 2.0, b.cx - bw / 2.0);
    double iy = std::min(a.cy + ah / 2.0, b.cy + bh / 2.0) -
                std::max(a.cy - ah / 2.0, b.cy - bh / 2.0);
    double inter = std::max(ix, 0.0) * std::max(iy, 0.0);
    double uni = aw * ah + bw * bh - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

std::optional<Vec3> frustum_axis(const Box3D& box, const CameraModel& cam) {
    Vec3 d = box.center - cam.extrinsic.position;
    double depth = d.dot(cam.extrinsic.forward());
    if (depth <= 0.0 || d.norm() == 0.0) return std::nullopt;
    return Vec3{d / d.norm()};
}

}  // namespace sgsim

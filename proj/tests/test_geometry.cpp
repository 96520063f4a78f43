#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sgsim/geometry.hpp"
#include "sgsim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace sgsim;

namespace {

CameraModel level_camera(double z, double f = 1000.0) {
    Pose pose;
    pose.position = {0.0, 0.0, z};
    return CameraModel(f, f, 960.0, 540.0, 1920.0, 1080.0, pose);
}

// Independent corner oracle: explicit rotation matrix applied to the local
// half-dim offsets.
std::vector<Vec3> oracle_corners(const Box3D& box) {
    double c = std::cos(box.yaw);
    double s = std::sin(box.yaw);
    std::vector<Vec3> out;
    for (double sx : {-1.0, 1.0}) {
        for (double sy : {-1.0, 1.0}) {
            for (double sz : {-1.0, 1.0}) {
                double lx = sx * box.dims.l / 2.0;
                double ly = sy * box.dims.w / 2.0;
                double lz = sz * box.dims.h / 2.0;
                out.push_back(box.center +
                              Vec3{c * lx - s * ly, s * lx + c * ly, lz});
            }
        }
    }
    return out;
}

// Per-corner pinhole projection for a yaw-0 camera (forward = +x, right = -y).
Box2D oracle_project(const Box3D& box, const CameraModel& cam) {
    double umin = 1e18, umax = -1e18, vmin = 1e18, vmax = -1e18;
    for (const Vec3& corner : oracle_corners(box)) {
        Vec3 d = corner - cam.extrinsic.position;
        double z = d.x();
        double u = cam.fu * (-d.y()) / z + cam.cu;
        double v = cam.fv * (-d.z()) / z + cam.cv;
        umin = std::min(umin, u);
        umax = std::max(umax, u);
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
    }
    umin = std::max(umin, 0.0);
    vmin = std::max(vmin, 0.0);
    umax = std::min(umax, cam.width);
    vmax = std::min(vmax, cam.height);
    return {(umin + umax) / 2, (vmin + vmax) / 2, umax - umin, vmax - vmin};
}

bool contains_close(const std::vector<Vec3>& set, const Vec3& p) {
    return std::any_of(set.begin(), set.end(),
                       [&](const Vec3& q) { return (p - q).norm() < 1e-9; });
}

}  // namespace

TEST_CASE("corners of the unit cube") {
    Box3D cube({0, 0, 0}, {1, 1, 1}, 0.0);
    auto corners = corners_3d(cube);
    for (const Vec3& c : corners) {
        CHECK(std::abs(c.x()) == doctest::Approx(0.5));
        CHECK(std::abs(c.y()) == doctest::Approx(0.5));
        CHECK(std::abs(c.z()) == doctest::Approx(0.5));
    }
    // Quarter turn maps the cube's vertex set onto itself.
    Box3D turned({0, 0, 0}, {1, 1, 1}, M_PI / 2.0);
    auto rotated = corners_3d(turned);
    std::vector<Vec3> base(corners.begin(), corners.end());
    for (const Vec3& c : rotated) CHECK(contains_close(base, c));
}

TEST_CASE("corners match the rotation-matrix oracle") {
    Box3D box({1, 2, 0}, {2, 3, 5}, 0.3);
    auto got = corners_3d(box);
    auto expected = oracle_corners(box);
    for (const Vec3& e : expected) {
        CHECK(contains_close({got.begin(), got.end()}, e));
    }
    // One corner frozen from the oracle: local (+l/2, +w/2, +h/2).
    Vec3 frozen{1.0 + 2.5 * std::cos(0.3) - 1.5 * std::sin(0.3),
                2.0 + 2.5 * std::sin(0.3) + 1.5 * std::cos(0.3), 1.0};
    CHECK(contains_close({got.begin(), got.end()}, frozen));
}

TEST_CASE("corner centroid equals the box center") {
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        Box3D box({rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(0, 3)},
                  {rng.uniform(0.3, 4), rng.uniform(0.3, 4), rng.uniform(0.3, 15)},
                  rng.uniform(-4, 4));
        Vec3 mean{0, 0, 0};
        for (const Vec3& c : corners_3d(box)) mean += c;
        mean /= 8.0;
        CHECK((mean - box.center).norm() < 1e-9);
    }
}

TEST_CASE("projection of a cube on the optical axis") {
    CameraModel cam = level_camera(0.0);
    Box3D cube({20, 0, 0}, {2, 2, 2}, 0.0);
    Projection proj = project_box(cube, cam);
    REQUIRE(proj.ok());
    // Nearest face at 19 m dominates the hull.
    CHECK(proj.box.w == doctest::Approx(2.0 * 1000.0 / 19.0));
    CHECK(proj.box.h == doctest::Approx(2.0 * 1000.0 / 19.0));
    CHECK(proj.box.cx == doctest::Approx(960.0));
    CHECK(proj.box.cy == doctest::Approx(540.0));

    Box2D oracle = oracle_project(cube, cam);
    CHECK(proj.box.w == doctest::Approx(oracle.w));
    CHECK(proj.box.h == doctest::Approx(oracle.h));
}

TEST_CASE("random projections match the pinhole oracle") {
    CameraModel cam = level_camera(1.6);
    Rng rng(23);
    int checked = 0;
    for (int i = 0; i < 300; ++i) {
        Box3D box({rng.uniform(6, 70), rng.uniform(-10, 10), rng.uniform(0.4, 2.0)},
                  {rng.uniform(0.5, 3.5), rng.uniform(0.5, 2.5), rng.uniform(0.5, 12)},
                  rng.uniform(-3, 3));
        Projection p = project_box(box, cam);
        if (!p.ok()) continue;
        Box2D oracle = oracle_project(box, cam);
        CHECK(p.box.cx == doctest::Approx(oracle.cx).epsilon(1e-9));
        CHECK(p.box.cy == doctest::Approx(oracle.cy).epsilon(1e-9));
        CHECK(p.box.w == doctest::Approx(oracle.w).epsilon(1e-9));
        CHECK(p.box.h == doctest::Approx(oracle.h).epsilon(1e-9));
        ++checked;
    }
    CHECK(checked > 200);
}

TEST_CASE("projection failure modes") {
    CameraModel cam = level_camera(0.0);
    Box3D behind({-10, 0, 0}, {2, 2, 2}, 0.0);
    CHECK(project_box(behind, cam).status == ProjectStatus::behind_camera);
    Box3D straddling({0.5, 0, 0}, {2, 2, 2}, 0.0);
    CHECK(project_box(straddling, cam).status == ProjectStatus::behind_camera);
    // Far to the left of the view frustum.
    Box3D off_left({10, 100, 0}, {2, 2, 2}, 0.0);
    CHECK(project_box(off_left, cam).status == ProjectStatus::out_of_view);
}

TEST_CASE("iou_2d basics") {
    Box2D a{0, 0, 1, 1};
    CHECK(iou_2d(a, a) == doctest::Approx(1.0));
    Box2D far_box{10, 10, 1, 1};
    CHECK(iou_2d(a, far_box) == doctest::Approx(0.0));
    // Unit squares offset by 0.5: overlap 0.5, union 1.5.
    Box2D shifted{0.5, 0, 1, 1};
    CHECK(iou_2d(a, shifted) == doctest::Approx(1.0 / 3.0));
    Box2D degenerate{0, 0, 0, 0};
    CHECK(iou_2d(degenerate, degenerate) == doctest::Approx(0.0));
}

TEST_CASE("iou_2d offset case cross-checked by rasterized area count") {
    Box2D a{0, 0, 1, 1};
    Box2D b{0.5, 0, 1, 1};
    int na = 0, nb = 0, nboth = 0;
    const int n = 600;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double x = -0.5 + (i + 0.5) * (2.0 / n);
            double y = -0.5 + (j + 0.5) * (1.0 / n);
            bool in_a = x >= a.left() && x < a.right() && y >= a.top() && y < a.bottom();
            bool in_b = x >= b.left() && x < b.right() && y >= b.top() && y < b.bottom();
            if (in_a) ++na;
            if (in_b) ++nb;
            if (in_a && in_b) ++nboth;
        }
    }
    double raster = static_cast<double>(nboth) / (na + nb - nboth);
    CHECK(iou_2d(a, b) == doctest::Approx(raster).epsilon(0.01));
}

TEST_CASE("iou_2d is symmetric and bounded") {
    Rng rng(11);
    for (int i = 0; i < 500; ++i) {
        Box2D a{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(0, 4), rng.uniform(0, 4)};
        Box2D b{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(0, 4), rng.uniform(0, 4)};
        CHECK(iou_2d(a, b) == doctest::Approx(iou_2d(b, a)));
        CHECK(iou_2d(a, b) >= 0.0);
        CHECK(iou_2d(a, b) <= 1.0);
    }
}

TEST_CASE("self-projection IoU is exactly one") {
    CameraModel cam = level_camera(1.2);
    Rng rng(13);
    for (int i = 0; i < 100; ++i) {
        Box3D box({rng.uniform(8, 60), rng.uniform(-8, 8), rng.uniform(0.5, 2.0)},
                  {rng.uniform(0.5, 3), rng.uniform(0.5, 2.5), rng.uniform(0.5, 8)},
                  rng.uniform(-3, 3));
        Projection p = project_box(box, cam);
        if (!p.ok()) continue;
        CHECK(iou_2d(p.box, p.box) == doctest::Approx(1.0));
    }
}

TEST_CASE("frustum axis cases") {
    CameraModel cam = level_camera(0.0);
    Box3D on_axis({25, 0, 0}, {2, 2, 2}, 0.0);
    auto axis = frustum_axis(on_axis, cam);
    REQUIRE(axis.has_value());
    CHECK((*axis - Vec3{1, 0, 0}).norm() < 1e-12);

    Box3D at_center({0, 0, 0}, {1, 1, 1}, 0.0);
    CHECK(!frustum_axis(at_center, cam).has_value());

    Box3D oblique({10, 5, 0}, {1, 1, 1}, 0.0);
    auto ax = frustum_axis(oblique, cam);
    REQUIRE(ax.has_value());
    Vec3 expect = Vec3{10, 5, 0}.normalized();
    CHECK((*ax - expect).norm() < 1e-12);
}

TEST_CASE("translation along the frustum axis keeps the center pixel put") {
    CameraModel cam = level_camera(1.4);
    Rng rng(17);
    for (int i = 0; i < 100; ++i) {
        Box3D box({rng.uniform(15, 40), rng.uniform(-5, 5), 0.9},
                  {1.8, 1.9, 4.4}, 0.0);
        auto axis = frustum_axis(box, cam);
        REQUIRE(axis.has_value());
        double t = rng.uniform(0.0, 5.0);
        Box3D moved(box.center + t * (*axis), box.dims, box.yaw);
        Eigen::Vector2d before = cam.pixel_of(box.center);
        Eigen::Vector2d after = cam.pixel_of(moved.center);
        CHECK((before - after).norm() < 1.0);
    }
}

TEST_CASE("invalid construction is rejected") {
    CHECK_THROWS_AS(Box3D({0, 0, 0}, {0.0, 1.0, 1.0}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(Box3D({0, 0, 0}, {1.0, -2.0, 1.0}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(CameraModel(0.0, 1000, 960, 540, 1920, 1080, Pose{}),
                    std::invalid_argument);
    CHECK_THROWS_AS(CameraModel(1000, 1000, 5000, 540, 1920, 1080, Pose{}),
                    std::invalid_argument);
}

TEST_CASE("yaw normalization lands in (-pi, pi]") {
    CHECK(normalize_yaw(M_PI) == doctest::Approx(M_PI));
    CHECK(normalize_yaw(-M_PI) == doctest::Approx(M_PI));
    CHECK(normalize_yaw(3 * M_PI / 2) == doctest::Approx(-M_PI / 2));
    CHECK(normalize_yaw(7 * M_PI) == doctest::Approx(M_PI));
}

#include "sgsim/scene.hpp"

#include "sgsim/errors.hpp"
#include "sgsim/rng.hpp"

#include <algorithm>
#include <cmath>

namespace sgsim {

std::string to_string(ObjectClass cls) {
    switch (cls) {
        case ObjectClass::car: return "car";
        case ObjectClass::van: return "van";
        case ObjectClass::truck: return "truck";
        case ObjectClass::bicycle: return "bicycle";
        case ObjectClass::pedestrian: return "pedestrian";
    }
    return "car";
}

std::optional<ObjectClass> class_from_string(const std::string& name) {
    for (ObjectClass cls : kAllClasses) {
        if (to_string(cls) == name) return cls;
    }
    return std::nullopt;
}

bool ClassPrior::contains(const Dims& d, double tol) const {
    Dims a = lo();
    Dims b = hi();
    return d.h >= a.h - tol && d.h <= b.h + tol && d.w >= a.w - tol &&
           d.w <= b.w + tol && d.l >= a.l - tol && d.l <= b.l + tol;
}

ClassPriorTable ClassPriorTable::defaults() {
    ClassPriorTable t;
    t.priors[ObjectClass::car] = {{1.6, 1.9, 4.5}, 0.3};
    t.priors[ObjectClass::van] = {{2.2, 2.1, 5.5}, 0.3};
    t.priors[ObjectClass::truck] = {{3.4, 2.6, 12.0}, 0.3};
    t.priors[ObjectClass::bicycle] = {{1.4, 0.6, 1.8}, 0.3};
    t.priors[ObjectClass::pedestrian] = {{1.75, 0.6, 0.6}, 0.3};
    return t;
}

const ClassPrior& ClassPriorTable::of(ObjectClass cls) const {
    auto it = priors.find(cls);
    if (it == priors.end()) {
        throw Error("no prior configured for class " + to_string(cls));
    }
    return it->second;
}

std::string to_string(Sensor sensor) {
    return sensor == Sensor::camera ? "camera" : "lidar";
}

Detection Detection::camera(std::string id, ObjectClass cls, const Box2D& box,
                            double confidence, std::optional<std::string> source) {
    Detection d;
    d.id = std::move(id);
    d.cls = cls;
    d.sensor = Sensor::camera;
    d.confidence = confidence;
    d.source_object = std::move(source);
    d.box2 = box;
    return d;
}

Detection Detection::lidar(std::string id, ObjectClass cls, const Box3D& box,
                           double confidence, std::optional<std::string> source,
                           std::optional<Vec3> velocity) {
    Detection d;
    d.id = std::move(id);
    d.cls = cls;
    d.sensor = Sensor::lidar;
    d.confidence = confidence;
    d.source_object = std::move(source);
    d.box3 = box;
    d.velocity = std::move(velocity);
    return d;
}

const Box2D& Detection::box_2d() const {
    if (!box2) throw std::logic_error("detection " + id + " has no 2D box");
    return *box2;
}

const Box3D& Detection::box_3d() const {
    if (!box3) throw std::logic_error("detection " + id + " has no 3D box");
    return *box3;
}

void NoiseSpec::validate() const {
    if (position_sigma < 0.0 || dimension_sigma < 0.0 || pixel_sigma < 0.0 ||
        miss_rate < 0.0 || miss_rate > 1.0 || clutter_rate < 0.0) {
        throw ConfigError("noise spec fields must be nonnegative (miss rate in [0,1])");
    }
}

namespace {

// Separating-axis test for two yaw-rotated rectangles in bird's-eye view.
bool bev_overlap(const Box3D& a, const Box3D& b) {
    auto footprint = [](const Box3D& box) {
        std::array<Eigen::Vector2d, 4> pts;
        double c = std::cos(box.yaw);
        double s = std::sin(box.yaw);
        double hl = box.dims.l / 2.0;
        double hw = box.dims.w / 2.0;
        pts[0] = {box.center.x() + c * hl - s * hw, box.center.y() + s * hl + c * hw};
        pts[1] = {box.center.x() + c * hl + s * hw, box.center.y() + s * hl - c * hw};
        pts[2] = {box.center.x() - c * hl + s * hw, box.center.y() - s * hl - c * hw};
        pts[3] = {box.center.x() - c * hl - s * hw, box.center.y() - s * hl + c * hw};
        return pts;
    };
    auto pa = footprint(a);
    auto pb = footprint(b);
    auto separated_on = [&](const Eigen::Vector2d& axis) {
        double alo = 1e300, ahi = -1e300, blo = 1e300, bhi = -1e300;
        for (const auto& p : pa) {
            double d = p.dot(axis);
            alo = std::min(alo, d);
            ahi = std::max(ahi, d);
        }
        for (const auto& p : pb) {
            double d = p.dot(axis);
            blo = std::min(blo, d);
            bhi = std::max(bhi, d);
        }
        return ahi < blo || bhi < alo;
    };
    for (const Box3D* box : {&a, &b}) {
        double c = std::cos(box->yaw);
        double s = std::sin(box->yaw);
        if (separated_on({c, s}) || separated_on({-s, c})) return false;
    }
    return true;
}

Dims sample_dims(const ClassPrior& prior, double jitter, Rng& rng) {
    double spread = std::min(jitter, prior.spread);
    auto one = [&](double nominal) {
        return nominal * (1.0 + rng.uniform(-spread, spread));
    };
    return {one(prior.nominal.h), one(prior.nominal.w), one(prior.nominal.l)};
}

ObjectClass pick_class(const std::map<ObjectClass, double>& weights, Rng& rng) {
    if (weights.empty()) {
        return kAllClasses[static_cast<std::size_t>(rng.uniform_int(5))];
    }
    double total = 0.0;
    for (const auto& [cls, w] : weights) total += w;
    double x = rng.uniform(0.0, total);
    for (const auto& [cls, w] : weights) {
        if (x < w) return cls;
        x -= w;
    }
    return weights.rbegin()->first;
}

}  // namespace

Scene generate_scene(const SceneSpec& spec, std::uint64_t seed) {
    if (spec.object_count < 0) throw ConfigError("object_count must be >= 0");
    Rng rng(derive_seed(seed, 0x5C33));

    std::vector<ObjectTemplate> slots = spec.objects;
    if (slots.empty()) {
        for (int i = 0; i < spec.object_count; ++i) {
            ObjectTemplate t;
            t.cls = pick_class(spec.class_weights, rng);
            t.depth_min = spec.depth_min;
            t.depth_max = spec.depth_max;
            t.lane = 0.0;
            t.lateral_jitter = (spec.lateral_max - spec.lateral_min) / 2.0;
            slots.push_back(t);
        }
    }

    Scene scene;
    scene.ego = spec.ego;
    scene.camera = spec.camera;
    scene.seed = seed;

    double lateral_mid = (spec.lateral_min + spec.lateral_max) / 2.0;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const ObjectTemplate& slot = slots[i];
        const ClassPrior& prior = spec.priors.of(slot.cls);
        bool placed = false;
        for (int attempt = 0; attempt < spec.placement_retries && !placed; ++attempt) {
            Dims dims = sample_dims(prior, spec.dim_jitter, rng);
            double depth = rng.uniform(slot.depth_min, slot.depth_max);
            double lane = spec.objects.empty() ? lateral_mid : slot.lane;
            double lateral = lane + rng.uniform(-slot.lateral_jitter, slot.lateral_jitter);
            // Positions are sampled in the ego frame, then mapped to world.
            Vec3 local{depth, lateral, dims.h / 2.0};
            double c = std::cos(spec.ego.yaw);
            double s = std::sin(spec.ego.yaw);
            Vec3 world{spec.ego.position.x() + c * local.x() - s * local.y(),
                       spec.ego.position.y() + s * local.x() + c * local.y(),
                       local.z()};
            Box3D box(world, dims, spec.ego.yaw);
            bool collides = false;
            for (const SceneObject& other : scene.objects) {
                if (bev_overlap(box, other.box)) {
                    collides = true;
                    break;
                }
            }
            if (collides) continue;

            SceneObject obj;
            obj.id = "obj" + std::to_string(i);
            obj.cls = slot.cls;
            obj.box = box;
            double speed = rng.uniform(spec.speed_min, spec.speed_max);
            obj.velocity = Vec3{std::cos(box.yaw), std::sin(box.yaw), 0.0} * speed;
            scene.objects.push_back(obj);
            placed = true;
        }
        if (!placed) {
            throw PlacementFailure("could not place object " + std::to_string(i) +
                                   " within " + std::to_string(spec.placement_retries) +
                                   " attempts");
        }
    }
    return scene;
}

std::vector<Detection> pseudo_detect_lidar(const Scene& scene,
                                           const NoiseSpec& noise,
                                           std::uint64_t seed) {
    noise.validate();
    Rng rng(derive_seed(seed, 0x11DA));
    std::vector<Detection> out;
    int index = 0;
    for (const SceneObject& obj : scene.objects) {
        if (rng.bernoulli(noise.miss_rate)) continue;
        Vec3 center = obj.box.center;
        Dims dims = obj.box.dims;
        if (noise.position_sigma > 0.0) {
            center.x() += rng.normal(0.0, noise.position_sigma);
            center.y() += rng.normal(0.0, noise.position_sigma);
            center.z() += rng.normal(0.0, noise.position_sigma);
        }
        if (noise.dimension_sigma > 0.0) {
            dims.h = std::max(0.05, dims.h * (1.0 + rng.normal(0.0, noise.dimension_sigma)));
            dims.w = std::max(0.05, dims.w * (1.0 + rng.normal(0.0, noise.dimension_sigma)));
            dims.l = std::max(0.05, dims.l * (1.0 + rng.normal(0.0, noise.dimension_sigma)));
        }
        Box3D box(center, dims, obj.box.yaw);
        out.push_back(Detection::lidar("L" + std::to_string(index++), obj.cls, box,
                                       1.0, obj.id, obj.velocity));
    }
    int clutter = rng.poisson(noise.clutter_rate);
    for (int k = 0; k < clutter; ++k) {
        ObjectClass cls = kAllClasses[static_cast<std::size_t>(rng.uniform_int(5))];
        // Clutter dims are drawn uniformly from the class prior range.
        ClassPrior prior = ClassPriorTable::defaults().of(cls);
        Dims lo = prior.lo();
        Dims hi = prior.hi();
        Dims dims{rng.uniform(lo.h, hi.h), rng.uniform(lo.w, hi.w), rng.uniform(lo.l, hi.l)};
        double depth = rng.uniform(5.0, 80.0);
        double lateral = rng.uniform(-8.0, 8.0);
        double c = std::cos(scene.ego.yaw);
        double s = std::sin(scene.ego.yaw);
        Vec3 world{scene.ego.position.x() + c * depth - s * lateral,
                   scene.ego.position.y() + s * depth + c * lateral, dims.h / 2.0};
        Box3D box(world, dims, scene.ego.yaw);
        out.push_back(Detection::lidar("L" + std::to_string(index++), cls, box, 0.5,
                                       std::nullopt, std::nullopt));
    }
    return out;
}

std::vector<Detection> pseudo_detect_camera(const Scene& scene,
                                            const NoiseSpec& noise,
                                            std::uint64_t seed,
                                            double visibility_cutoff) {
    noise.validate();
    Rng rng(derive_seed(seed, 0xCA3E));
    std::vector<Detection> out;
    int index = 0;
    for (const SceneObject& obj : scene.objects) {
        Projection proj = project_box(obj.box, scene.camera);
        if (!proj.ok()) continue;
        double worst = 0.0;
        for (const SceneObject& other : scene.objects) {
            if (other.id == obj.id) continue;
            worst = std::max(worst, occlusion_fraction(obj, other, scene.camera));
        }
        if (worst > visibility_cutoff) continue;
        if (rng.bernoulli(noise.miss_rate)) continue;
        Box2D box = proj.box;
        if (noise.pixel_sigma > 0.0) {
            box.cx += rng.normal(0.0, noise.pixel_sigma);
            box.cy += rng.normal(0.0, noise.pixel_sigma);
            box.w = std::max(1.0, box.w + rng.normal(0.0, noise.pixel_sigma));
            box.h = std::max(1.0, box.h + rng.normal(0.0, noise.pixel_sigma));
        }
        out.push_back(Detection::camera("C" + std::to_string(index++), obj.cls, box,
                                        1.0, obj.id));
    }
    return out;
}

double occlusion_fraction(const Box3D& subject, const Box3D& blocker,
                          const CameraModel& cam) {
    Projection ps = project_box(subject, cam);
    Projection pb = project_box(blocker, cam);
    if (!ps.ok() || !pb.ok()) return 0.0;
    if (cam.depth_of(blocker.center) >= cam.depth_of(subject.center)) return 0.0;
    double ix = std::min(ps.box.right(), pb.box.right()) -
                std::max(ps.box.left(), pb.box.left());
    double iy = std::min(ps.box.bottom(), pb.box.bottom()) -
                std::max(ps.box.top(), pb.box.top());
    double inter = std::max(ix, 0.0) * std::max(iy, 0.0);
    double area = ps.box.area();
    return area > 0.0 ? inter / area : 0.0;
}

double occlusion_fraction(const SceneObject& subject, const SceneObject& blocker,
                          const CameraModel& cam) {
    return occlusion_fraction(subject.box, blocker.box, cam);
}

}  // namespace sgsim

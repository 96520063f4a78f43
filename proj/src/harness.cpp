#include "sgsim/harness.hpp"

#include "sgsim/errors.hpp"
#include "sgsim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace sgsim {

namespace {

double get_number(const Json& j, const std::string& path, const char* key,
                  double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw ConfigError(path + "." + key + ": expected a number");
    return j[key].get<double>();
}

int get_int(const Json& j, const std::string& path, const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_integer()) {
        throw ConfigError(path + "." + key + ": expected an integer");
    }
    return j[key].get<int>();
}

bool get_bool(const Json& j, const std::string& path, const char* key, bool fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_boolean()) throw ConfigError(path + "." + key + ": expected a boolean");
    return j[key].get<bool>();
}

std::string get_string(const Json& j, const std::string& path, const char* key,
                       const std::string& fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_string()) throw ConfigError(path + "." + key + ": expected a string");
    return j[key].get<std::string>();
}

Vec3 vec3_from(const Json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3 || !j[0].is_number()) {
        throw ConfigError(path + ": expected [x, y, z]");
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Json vec3_to(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Dims dims_from(const Json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(path + ": expected [h, w, l]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Json dims_to(const Dims& d) { return Json::array({d.h, d.w, d.l}); }

ObjectClass class_from(const Json& j, const std::string& path) {
    if (!j.is_string()) throw ConfigError(path + ": expected a class name");
    auto cls = class_from_string(j.get<std::string>());
    if (!cls) throw ConfigError(path + ": unknown class \"" + j.get<std::string>() + "\"");
    return *cls;
}

CameraModel camera_from_json(const Json& j, const std::string& path) {
    CameraModel base;
    double fu = get_number(j, path, "fu", base.fu);
    double fv = get_number(j, path, "fv", base.fv);
    double cu = get_number(j, path, "cu", base.cu);
    double cv = get_number(j, path, "cv", base.cv);
    double width = get_number(j, path, "width", base.width);
    double height = get_number(j, path, "height", base.height);
    Pose pose;
    pose.position = j.contains("position") ? vec3_from(j["position"], path + ".position")
                                           : Vec3{0.0, 0.0, 1.6};
    pose.yaw = get_number(j, path, "yaw", 0.0);
    try {
        return CameraModel(fu, fv, cu, cv, width, height, pose);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

Json camera_to_json(const CameraModel& cam) {
    Json j;
    j["fu"] = cam.fu;
    j["fv"] = cam.fv;
    j["cu"] = cam.cu;
    j["cv"] = cam.cv;
    j["width"] = cam.width;
    j["height"] = cam.height;
    j["position"] = vec3_to(cam.extrinsic.position);
    j["yaw"] = cam.extrinsic.yaw;
    return j;
}

}  // namespace

IntegrityContext ScenarioConfig::integrity_context() const {
    IntegrityContext ctx;
    ctx.ego = scene.ego;
    ctx.cam = scene.camera;
    ctx.relations = relations;
    ctx.priors = scene.priors;
    ctx.match_threshold = match_threshold;
    return ctx;
}

ScenarioConfig ScenarioConfig::from_json(const Json& doc) {
    if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
    ScenarioConfig cfg;
    cfg.schema_version = get_int(doc, "config", "schema_version", 1);
    if (cfg.schema_version != 1) {
        throw ConfigError("config.schema_version: unsupported version");
    }
    if (!doc.contains("seed")) {
        throw ConfigError("config.seed: required for reproducibility");
    }
    if (!doc["seed"].is_number_integer()) {
        throw ConfigError("config.seed: expected an integer");
    }
    cfg.seed = doc["seed"].get<std::uint64_t>();
    cfg.trials = get_int(doc, "config", "trials", 1);
    if (cfg.trials < 0) throw ConfigError("config.trials: must be >= 0");

    if (doc.contains("scene")) {
        const Json& s = doc["scene"];
        if (!s.is_object()) throw ConfigError("config.scene: expected an object");
        if (s.contains("ego")) {
            cfg.scene.ego.position = s["ego"].contains("position")
                                         ? vec3_from(s["ego"]["position"], "scene.ego.position")
                                         : Vec3{0, 0, 0};
            cfg.scene.ego.yaw = get_number(s["ego"], "scene.ego", "yaw", 0.0);
        }
        cfg.scene.camera = s.contains("camera")
                               ? camera_from_json(s["camera"], "scene.camera")
                               : camera_from_json(Json::object(), "scene.camera");
        if (s.contains("class_priors")) {
            for (const auto& [name, pj] : s["class_priors"].items()) {
                auto cls = class_from_string(name);
                if (!cls) throw ConfigError("scene.class_priors: unknown class " + name);
                ClassPrior prior;
                prior.nominal = dims_from(pj.at("nominal"), "scene.class_priors." + name);
                prior.spread = get_number(pj, "scene.class_priors." + name, "spread", 0.3);
                if (prior.spread < 0.0 || prior.spread >= 1.0) {
                    throw ConfigError("scene.class_priors." + name + ".spread: must be in [0,1)");
                }
                cfg.scene.priors.priors[*cls] = prior;
            }
        }
        if (s.contains("objects")) {
            if (!s["objects"].is_array()) throw ConfigError("scene.objects: expected an array");
            int k = 0;
            for (const auto& oj : s["objects"]) {
                std::string path = "scene.objects[" + std::to_string(k++) + "]";
                ObjectTemplate t;
                t.cls = class_from(oj.at("class"), path + ".class");
                if (!oj.contains("depth") || !oj["depth"].is_array() ||
                    oj["depth"].size() != 2) {
                    throw ConfigError(path + ".depth: expected [min, max]");
                }
                t.depth_min = oj["depth"][0].get<double>();
                t.depth_max = oj["depth"][1].get<double>();
                if (t.depth_min <= 0.0 || t.depth_max < t.depth_min) {
                    throw ConfigError(path + ".depth: need 0 < min <= max");
                }
                t.lane = get_number(oj, path, "lane", 0.0);
                t.lateral_jitter = get_number(oj, path, "lateral_jitter", 0.3);
                cfg.scene.objects.push_back(t);
            }
        }
        cfg.scene.object_count = get_int(s, "scene", "object_count", 0);
        if (s.contains("class_weights")) {
            for (const auto& [name, w] : s["class_weights"].items()) {
                auto cls = class_from_string(name);
                if (!cls) throw ConfigError("scene.class_weights: unknown class " + name);
                double weight = w.get<double>();
                if (weight < 0.0) {
                    throw ConfigError("scene.class_weights." + name + ": must be >= 0");
                }
                cfg.scene.class_weights[*cls] = weight;
            }
        }
        if (s.contains("depth_range")) {
            cfg.scene.depth_min = s["depth_range"][0].get<double>();
            cfg.scene.depth_max = s["depth_range"][1].get<double>();
        }
        if (s.contains("lateral_range")) {
            cfg.scene.lateral_min = s["lateral_range"][0].get<double>();
            cfg.scene.lateral_max = s["lateral_range"][1].get<double>();
        }
        cfg.scene.dim_jitter = get_number(s, "scene", "dim_jitter", 0.3);
        if (cfg.scene.dim_jitter < 0.0 || cfg.scene.dim_jitter >= 1.0) {
            throw ConfigError("scene.dim_jitter: must be in [0,1)");
        }
        if (s.contains("speed")) {
            cfg.scene.speed_min = s["speed"][0].get<double>();
            cfg.scene.speed_max = s["speed"][1].get<double>();
        }
        cfg.scene.visibility_cutoff = get_number(s, "scene", "visibility_cutoff", 0.7);
        if (cfg.scene.visibility_cutoff < 0.0 || cfg.scene.visibility_cutoff > 1.0) {
            throw ConfigError("scene.visibility_cutoff: must be in [0,1]");
        }
        cfg.scene.placement_retries = get_int(s, "scene", "placement_retries", 100);
    } else {
        cfg.scene.camera = camera_from_json(Json::object(), "scene.camera");
    }

    if (doc.contains("noise")) {
        const Json& n = doc["noise"];
        cfg.noise.position_sigma = get_number(n, "noise", "position_sigma", 0.0);
        cfg.noise.dimension_sigma = get_number(n, "noise", "dimension_sigma", 0.0);
        cfg.noise.pixel_sigma = get_number(n, "noise", "pixel_sigma", 0.0);
        cfg.noise.miss_rate = get_number(n, "noise", "miss_rate", 0.0);
        cfg.noise.clutter_rate = get_number(n, "noise", "clutter_rate", 0.0);
        try {
            cfg.noise.validate();
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("noise: ") + e.what());
        }
    }

    if (doc.contains("attacks")) {
        if (!doc["attacks"].is_array()) throw ConfigError("attacks: expected an array");
        int k = 0;
        for (const auto& aj : doc["attacks"]) {
            std::string path = "attacks[" + std::to_string(k++) + "]";
            AttackConfig a;
            auto kind = attack_kind_from_string(
                get_string(aj, path, "kind", "frustum_translate"));
            if (!kind) throw ConfigError(path + ".kind: unknown attack kind");
            a.kind = *kind;
            a.target_id = get_string(aj, path, "target_id", "");
            if (aj.contains("target_class")) {
                a.target_class = class_from(aj["target_class"], path + ".target_class");
            }
            if (aj.contains("target_index")) {
                a.target_index = get_int(aj, path, "target_index", 0);
            }
            if (aj.contains("spawn")) {
                SpawnParams sp;
                sp.cls = class_from(aj["spawn"].at("class"), path + ".spawn.class");
                sp.x = get_number(aj["spawn"], path + ".spawn", "x", 20.0);
                sp.y = get_number(aj["spawn"], path + ".spawn", "y", 0.0);
                sp.yaw = get_number(aj["spawn"], path + ".spawn", "yaw", 0.0);
                a.spawn = sp;
            }
            if (aj.contains("constraints")) {
                const Json& cj = aj["constraints"];
                a.constraints.v_min = get_number(cj, path, "v_min", a.constraints.v_min);
                a.constraints.v_max = get_number(cj, path, "v_max", a.constraints.v_max);
                if (cj.contains("dim_min")) {
                    a.constraints.dim_min = dims_from(cj["dim_min"], path + ".dim_min");
                }
                if (cj.contains("dim_max")) {
                    a.constraints.dim_max = dims_from(cj["dim_max"], path + ".dim_max");
                }
                a.constraints.zeta_min =
                    get_number(cj, path, "zeta_min", a.constraints.zeta_min);
            }
            try {
                a.constraints.validate();
            } catch (const ConfigError& e) {
                throw ConfigError(path + ".constraints: " + e.what());
            }
            if (a.kind == AttackKind::false_positive && !a.spawn) {
                throw ConfigError(path + ": false_positive requires spawn parameters");
            }
            if (a.kind != AttackKind::false_positive && a.target_id.empty() &&
                !a.target_class && !a.target_index) {
                throw ConfigError(path + ": need target_id, target_class or target_index");
            }
            cfg.attacks.push_back(a);
        }
    }

    if (doc.contains("relations")) {
        const Json& r = doc["relations"];
        RelationParams& p = cfg.relations;
        p.d_close = get_number(r, "relations", "d_close", p.d_close);
        p.d_far = get_number(r, "relations", "d_far", p.d_far);
        p.next_to_lateral = get_number(r, "relations", "next_to_lateral", p.next_to_lateral);
        p.next_to_forward = get_number(r, "relations", "next_to_forward", p.next_to_forward);
        p.front_margin = get_number(r, "relations", "front_margin", p.front_margin);
        p.lane_half_width = get_number(r, "relations", "lane_half_width", p.lane_half_width);
        p.occlusion_overlap =
            get_number(r, "relations", "occlusion_overlap", p.occlusion_overlap);
        p.following_max_gap =
            get_number(r, "relations", "following_max_gap", p.following_max_gap);
        p.heading_cos_min = get_number(r, "relations", "heading_cos_min", p.heading_cos_min);
        p.min_speed = get_number(r, "relations", "min_speed", p.min_speed);
        try {
            p.validate();
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("relations: ") + e.what());
        }
    }

    if (doc.contains("knowledge_base")) {
        const Json& kj = doc["knowledge_base"];
        std::string preset = get_string(kj, "knowledge_base", "preset", "default");
        if (preset == "none") {
            cfg.kb.rules.clear();
        } else if (preset != "default") {
            throw ConfigError("knowledge_base.preset: expected \"default\" or \"none\"");
        }
        cfg.kb.check_dims = get_bool(kj, "knowledge_base", "check_dims", true);
    }
    cfg.kb.priors = cfg.scene.priors;

    if (doc.contains("thresholds")) {
        const Json& t = doc["thresholds"];
        cfg.assignment_gate = get_number(t, "thresholds", "assignment_gate", 0.3);
        cfg.match_threshold = get_number(t, "thresholds", "match_threshold", 0.3);
        if (cfg.assignment_gate < 0.0 || cfg.assignment_gate > 1.0 ||
            cfg.match_threshold < 0.0 || cfg.match_threshold > 1.0) {
            throw ConfigError("thresholds: gates must be in [0,1]");
        }
    }

    if (doc.contains("camera_graph")) {
        const Json& cj = doc["camera_graph"];
        std::string source = get_string(cj, "camera_graph", "source", "monocular");
        if (source == "monocular") {
            cfg.camera_graph.source = CameraGraphConfig::Source::monocular;
        } else if (source == "import") {
            cfg.camera_graph.source = CameraGraphConfig::Source::import_files;
        } else {
            throw ConfigError("camera_graph.source: expected \"monocular\" or \"import\"");
        }
        cfg.camera_graph.import_pattern =
            get_string(cj, "camera_graph", "import_pattern", "");
        if (cfg.camera_graph.source == CameraGraphConfig::Source::import_files &&
            cfg.camera_graph.import_pattern.empty()) {
            throw ConfigError("camera_graph.import_pattern: required for import source");
        }
        cfg.camera_graph.strict_predicates =
            get_bool(cj, "camera_graph", "strict_predicates", false);
    }

    if (doc.contains("dataset")) {
        cfg.dataset_attack_fraction =
            get_number(doc["dataset"], "dataset", "attack_fraction", 1.0);
        if (cfg.dataset_attack_fraction < 0.0 || cfg.dataset_attack_fraction > 1.0) {
            throw ConfigError("dataset.attack_fraction: must be in [0,1]");
        }
    }
    return cfg;
}

Json ScenarioConfig::to_json() const {
    Json doc;
    doc["schema_version"] = schema_version;
    doc["seed"] = seed;
    doc["trials"] = trials;

    Json s;
    s["ego"] = {{"position", vec3_to(scene.ego.position)}, {"yaw", scene.ego.yaw}};
    s["camera"] = camera_to_json(scene.camera);
    Json priors = Json::object();
    for (const auto& [cls, prior] : scene.priors.priors) {
        priors[to_string(cls)] = {{"nominal", dims_to(prior.nominal)},
                                  {"spread", prior.spread}};
    }
    s["class_priors"] = priors;
    Json objs = Json::array();
    for (const ObjectTemplate& t : scene.objects) {
        objs.push_back({{"class", to_string(t.cls)},
                        {"depth", Json::array({t.depth_min, t.depth_max})},
                        {"lane", t.lane},
                        {"lateral_jitter", t.lateral_jitter}});
    }
    s["objects"] = objs;
    s["object_count"] = scene.object_count;
    Json weights = Json::object();
    for (const auto& [cls, w] : scene.class_weights) weights[to_string(cls)] = w;
    s["class_weights"] = weights;
    s["depth_range"] = Json::array({scene.depth_min, scene.depth_max});
    s["lateral_range"] = Json::array({scene.lateral_min, scene.lateral_max});
    s["dim_jitter"] = scene.dim_jitter;
    s["speed"] = Json::array({scene.speed_min, scene.speed_max});
    s["visibility_cutoff"] = scene.visibility_cutoff;
    s["placement_retries"] = scene.placement_retries;
    doc["scene"] = s;

    doc["noise"] = {{"position_sigma", noise.position_sigma},
                    {"dimension_sigma", noise.dimension_sigma},
                    {"pixel_sigma", noise.pixel_sigma},
                    {"miss_rate", noise.miss_rate},
                    {"clutter_rate", noise.clutter_rate}};

    Json attacks_json = Json::array();
    for (const AttackConfig& a : attacks) {
        Json aj;
        aj["kind"] = to_string(a.kind);
        if (!a.target_id.empty()) aj["target_id"] = a.target_id;
        if (a.target_class) aj["target_class"] = to_string(*a.target_class);
        if (a.target_index) aj["target_index"] = *a.target_index;
        if (a.spawn) {
            aj["spawn"] = {{"class", to_string(a.spawn->cls)},
                           {"x", a.spawn->x},
                           {"y", a.spawn->y},
                           {"yaw", a.spawn->yaw}};
        }
        aj["constraints"] = {{"v_min", a.constraints.v_min},
                             {"v_max", a.constraints.v_max},
                             {"dim_min", dims_to(a.constraints.dim_min)},
                             {"dim_max", dims_to(a.constraints.dim_max)},
                             {"zeta_min", a.constraints.zeta_min}};
        attacks_json.push_back(aj);
    }
    doc["attacks"] = attacks_json;

    doc["relations"] = {{"d_close", relations.d_close},
                        {"d_far", relations.d_far},
                        {"next_to_lateral", relations.next_to_lateral},
                        {"next_to_forward", relations.next_to_forward},
                        {"front_margin", relations.front_margin},
                        {"lane_half_width", relations.lane_half_width},
                        {"occlusion_overlap", relations.occlusion_overlap},
                        {"following_max_gap", relations.following_max_gap},
                        {"heading_cos_min", relations.heading_cos_min},
                        {"min_speed", relations.min_speed}};
    doc["knowledge_base"] = {{"preset", kb.rules.empty() ? "none" : "default"},
                             {"check_dims", kb.check_dims}};
    doc["thresholds"] = {{"assignment_gate", assignment_gate},
                         {"match_threshold", match_threshold}};
    doc["camera_graph"] = {
        {"source", camera_graph.source == CameraGraphConfig::Source::monocular
                       ? "monocular"
                       : "import"},
        {"import_pattern", camera_graph.import_pattern},
        {"strict_predicates", camera_graph.strict_predicates}};
    doc["dataset"] = {{"attack_fraction", dataset_attack_fraction}};
    return doc;
}

ScenarioConfig load_config(const std::string& path) {
    return ScenarioConfig::from_json(read_json_file(path));
}

// --- digests and files ---

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string digest_hex(const std::string& bytes) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(bytes);
    return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailure("cannot open " + path + " for writing");
    out << text;
    if (!out) throw IoFailure("failed writing " + path);
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open " + path);
    Json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaViolation(path + ": " + e.what());
    }
    return doc;
}

// --- scene / detection serialization ---

Json scene_to_json(const Scene& scene) {
    Json doc;
    doc["ego"] = {{"position", vec3_to(scene.ego.position)}, {"yaw", scene.ego.yaw}};
    doc["camera"] = camera_to_json(scene.camera);
    doc["seed"] = scene.seed;
    Json objs = Json::array();
    for (const SceneObject& o : scene.objects) {
        objs.push_back({{"id", o.id},
                        {"class", to_string(o.cls)},
                        {"center", vec3_to(o.box.center)},
                        {"dims", dims_to(o.box.dims)},
                        {"yaw", o.box.yaw},
                        {"velocity", vec3_to(o.velocity)}});
    }
    doc["objects"] = objs;
    return doc;
}

Scene scene_from_json(const Json& doc) {
    Scene scene;
    scene.ego.position = vec3_from(doc.at("ego").at("position"), "scene.ego.position");
    scene.ego.yaw = doc.at("ego").at("yaw").get<double>();
    scene.camera = camera_from_json(doc.at("camera"), "scene.camera");
    scene.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& oj : doc.at("objects")) {
        SceneObject o;
        o.id = oj.at("id").get<std::string>();
        o.cls = class_from(oj.at("class"), "scene.objects.class");
        o.box = Box3D(vec3_from(oj.at("center"), "center"),
                      dims_from(oj.at("dims"), "dims"), oj.at("yaw").get<double>());
        o.velocity = vec3_from(oj.at("velocity"), "velocity");
        scene.objects.push_back(o);
    }
    return scene;
}

std::string scene_digest(const Scene& scene) {
    return digest_hex(scene_to_json(scene).dump());
}

Json detections_to_json(const std::vector<Detection>& dets) {
    Json arr = Json::array();
    for (const Detection& d : dets) {
        Json j;
        j["id"] = d.id;
        j["class"] = to_string(d.cls);
        j["sensor"] = to_string(d.sensor);
        j["confidence"] = d.confidence;
        j["source_object"] = d.source_object ? Json(*d.source_object) : Json(nullptr);
        if (d.box2) {
            j["box2"] = {{"cx", d.box2->cx}, {"cy", d.box2->cy}, {"w", d.box2->w},
                         {"h", d.box2->h}};
        }
        if (d.box3) {
            j["box3"] = {{"center", vec3_to(d.box3->center)},
                         {"dims", dims_to(d.box3->dims)},
                         {"yaw", d.box3->yaw}};
        }
        if (d.velocity) j["velocity"] = vec3_to(*d.velocity);
        arr.push_back(j);
    }
    return arr;
}

std::vector<Detection> detections_from_json(const Json& doc) {
    if (!doc.is_array()) throw SchemaViolation("detections: expected an array");
    std::vector<Detection> out;
    for (const auto& j : doc) {
        Detection d;
        d.id = j.at("id").get<std::string>();
        d.cls = class_from(j.at("class"), "detections.class");
        std::string sensor = j.at("sensor").get<std::string>();
        if (sensor == "camera") {
            d.sensor = Sensor::camera;
        } else if (sensor == "lidar") {
            d.sensor = Sensor::lidar;
        } else {
            throw SchemaViolation("detections.sensor: unknown sensor " + sensor);
        }
        d.confidence = j.at("confidence").get<double>();
        if (j.contains("source_object") && !j["source_object"].is_null()) {
            d.source_object = j["source_object"].get<std::string>();
        }
        if (j.contains("box2")) {
            const Json& b = j["box2"];
            d.box2 = Box2D{b.at("cx").get<double>(), b.at("cy").get<double>(),
                           b.at("w").get<double>(), b.at("h").get<double>()};
        }
        if (j.contains("box3")) {
            const Json& b = j["box3"];
            d.box3 = Box3D(vec3_from(b.at("center"), "box3.center"),
                           dims_from(b.at("dims"), "box3.dims"),
                           b.at("yaw").get<double>());
        }
        if (j.contains("velocity")) d.velocity = vec3_from(j["velocity"], "velocity");
        if ((d.sensor == Sensor::camera) != d.box2.has_value() ||
            (d.sensor == Sensor::lidar) != d.box3.has_value()) {
            throw SchemaViolation("detection " + d.id + ": geometry does not match sensor");
        }
        out.push_back(d);
    }
    return out;
}

// --- report serialization ---

Json consistency_to_json(const ConsistencyReport& report) {
    Json doc;
    Json node_labels;
    Json cam_nodes = Json::object();
    for (const auto& [id, label] : report.camera_node_labels) {
        cam_nodes[id] = to_string(label);
    }
    Json lidar_nodes = Json::object();
    for (const auto& [id, label] : report.lidar_node_labels) {
        lidar_nodes[id] = to_string(label);
    }
    node_labels["camera"] = cam_nodes;
    node_labels["lidar"] = lidar_nodes;
    doc["node_labels"] = node_labels;

    auto edges_json = [](const std::map<GraphEdge, Label>& labels) {
        Json arr = Json::array();
        for (const auto& [edge, label] : labels) {
            arr.push_back({{"subject", edge.subject},
                           {"predicate", to_string(edge.predicate)},
                           {"object", edge.object},
                           {"label", to_string(label)}});
        }
        return arr;
    };
    doc["edge_labels"] = {{"camera", edges_json(report.camera_edge_labels)},
                          {"lidar", edges_json(report.lidar_edge_labels)}};

    Json violations = Json::array();
    for (const Violation& v : report.violations) {
        Json ej = Json::array();
        for (const GraphEdge& e : v.edges) {
            ej.push_back({{"subject", e.subject},
                          {"predicate", to_string(e.predicate)},
                          {"object", e.object}});
        }
        violations.push_back({{"rule", v.rule},
                              {"nodes", v.node_ids},
                              {"edges", ej},
                              {"detail", v.detail}});
    }
    doc["violations"] = violations;

    Json hyps = Json::array();
    for (const PerturbationHypothesis& h : report.hypotheses) {
        Json hj;
        hj["suspect"] = h.suspect;
        hj["kind"] = to_string(h.kind);
        hj["score"] = h.score;
        if (h.kind == HypothesisKind::translation_along_ray) {
            hj["displacement_m"] = h.displacement_m;
            hj["displacement_lo"] = h.displacement_lo;
            hj["displacement_hi"] = h.displacement_hi;
        }
        hyps.push_back(hj);
    }
    doc["hypotheses"] = hyps;
    return doc;
}

Json attack_result_to_json(const AttackResult& result) {
    auto box_json = [](const Box3D& b) {
        return Json{{"center", vec3_to(b.center)},
                    {"dims", dims_to(b.dims)},
                    {"yaw", b.yaw}};
    };
    Json doc;
    doc["target_id"] = result.target_id;
    doc["feasible"] = true;
    doc["displacement_m"] = result.displacement_m;
    doc["achieved_iou"] = result.achieved_iou;
    doc["scale"] = result.scale;
    doc["original_box"] = box_json(result.original_box);
    doc["attacked_box"] = box_json(result.attacked_box);
    return doc;
}

Json fused_to_json(const std::vector<FusedObject>& fused) {
    Json arr = Json::array();
    for (const FusedObject& f : fused) {
        Json j;
        j["position"] = vec3_to(f.position);
        j["class"] = to_string(f.cls);
        j["camera_id"] = f.camera_id ? Json(*f.camera_id) : Json(nullptr);
        j["lidar_id"] = f.lidar_id ? Json(*f.lidar_id) : Json(nullptr);
        j["weight"] = f.weight;
        j["flagged"] = f.flagged;
        j["camera_only"] = f.camera_only;
        Json hyps = Json::array();
        for (const PerturbationHypothesis& h : f.hypotheses) {
            hyps.push_back({{"suspect", h.suspect},
                            {"kind", to_string(h.kind)},
                            {"score", h.score}});
        }
        j["hypotheses"] = hyps;
        arr.push_back(j);
    }
    return arr;
}

Json metrics_to_json(const Metrics& m) {
    Json doc;
    doc["trials"] = m.trial_count;
    doc["attacked_trials"] = m.attacked_count;
    doc["feasible_attacks"] = m.feasible_count;
    if (m.attack_detection_rate) doc["attack_detection_rate"] = *m.attack_detection_rate;
    if (m.false_alarm_rate) doc["false_alarm_rate"] = *m.false_alarm_rate;
    doc["mean_displacement_m"] = m.mean_displacement_m;
    doc["max_displacement_m"] = m.max_displacement_m;
    doc["mean_achieved_iou"] = m.mean_achieved_iou;
    if (m.no_flip_fraction) doc["no_flip_fraction"] = *m.no_flip_fraction;
    return doc;
}

Json trial_to_json(const TrialRecord& t) {
    Json doc;
    doc["index"] = t.index;
    doc["seed"] = t.seed;
    doc["scene_digest"] = t.scene_digest;
    doc["attacked"] = t.attacked;
    if (t.attacked) {
        if (t.attack) {
            doc["attack"] = attack_result_to_json(*t.attack);
        } else {
            doc["attack"] = {{"target_id", t.attacked_node_id}, {"feasible", false}};
        }
    } else {
        doc["attack"] = nullptr;
    }
    doc["attacked_node"] = t.attacked_node_id.empty() ? Json(nullptr)
                                                      : Json(t.attacked_node_id);
    doc["relation_flips"] = t.relation_flips;
    Json graphs;
    graphs["camera"] = graph_to_json(t.g_cam);
    graphs["lidar"] = graph_to_json(t.g_lidar_benign);
    if (t.attacked) graphs["lidar_attacked"] = graph_to_json(t.g_lidar);
    doc["graphs"] = graphs;
    doc["consistency"] = consistency_to_json(t.report);
    doc["fused"] = fused_to_json(t.fused);
    return doc;
}

Json run_report_to_json(const RunReport& report) {
    Json doc;
    doc["schema_version"] = report.schema_version;
    doc["config_digest"] = report.config_digest;
    Json trials = Json::array();
    for (const TrialRecord& t : report.trials) trials.push_back(trial_to_json(t));
    doc["trials"] = trials;
    doc["metrics"] = metrics_to_json(report.metrics);
    return doc;
}

std::string metrics_csv(const RunReport& report) {
    std::ostringstream os;
    os << "trial,attacked,detected,displacement_m,achieved_iou,relation_flips,false_alarms\n";
    for (const TrialRecord& t : report.trials) {
        double disp = t.attack ? t.attack->displacement_m : 0.0;
        double iou = t.attack ? t.attack->achieved_iou : 0.0;
        int false_alarms = t.attacked ? 0 : t.inconsistent_labels();
        os << t.index << ',' << (t.attacked ? 1 : 0) << ',' << (t.detected() ? 1 : 0)
           << ',' << Json(disp).dump() << ',' << Json(iou).dump() << ','
           << t.relation_flips << ',' << false_alarms << '\n';
    }
    return os.str();
}

// --- trial pipeline ---

bool TrialRecord::detected() const {
    return attacked && attack_feasible && !attacked_node_id.empty() &&
           report.node_inconsistent(Sensor::lidar, attacked_node_id);
}

int TrialRecord::inconsistent_labels() const {
    int n = report.inconsistent_count();
    for (const auto& [_, label] : report.camera_node_labels) {
        if (label == Label::inconsistent) ++n;
    }
    for (const auto& [_, label] : report.lidar_node_labels) {
        if (label == Label::inconsistent) ++n;
    }
    return n;
}

namespace {

std::string resolve_target(const AttackConfig& a, const std::vector<Detection>& lidar) {
    if (!a.target_id.empty()) return a.target_id;
    if (a.target_class) {
        for (const Detection& d : lidar) {
            if (d.cls == *a.target_class) return d.id;
        }
        throw UnknownTarget("no lidar detection of class " + to_string(*a.target_class));
    }
    if (a.target_index) {
        std::string obj_id = "obj" + std::to_string(*a.target_index);
        for (const Detection& d : lidar) {
            if (d.source_object && *d.source_object == obj_id) return d.id;
        }
        throw UnknownTarget("no lidar detection for object index " +
                            std::to_string(*a.target_index));
    }
    throw ConfigError("attack entry has no target selector");
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
    return s;
}

}  // namespace

TrialRecord run_trial(const ScenarioConfig& config, int trial_index, bool with_attacks) {
    TrialRecord t;
    t.index = trial_index;
    t.seed = derive_seed(config.seed, static_cast<std::uint64_t>(trial_index));
    t.scene = generate_scene(config.scene, derive_seed(t.seed, 1));
    t.scene_digest = scene_digest(t.scene);
    t.camera_detections = pseudo_detect_camera(t.scene, config.noise,
                                               derive_seed(t.seed, 2),
                                               config.scene.visibility_cutoff);
    t.lidar_benign = pseudo_detect_lidar(t.scene, config.noise, derive_seed(t.seed, 3));
    t.lidar_final = t.lidar_benign;

    if (with_attacks && !config.attacks.empty()) {
        t.attacked = true;
        t.attack_feasible = true;
        AttackContext ctx{config.scene.camera, t.camera_detections, config.assignment_gate};
        for (const AttackConfig& a : config.attacks) {
            try {
                AttackSpec spec;
                spec.kind = a.kind;
                spec.spawn = a.spawn;
                spec.constraints = a.constraints;
                if (a.kind != AttackKind::false_positive) {
                    spec.target_id = resolve_target(a, t.lidar_final);
                }
                auto [next, result] = apply_attack(t.lidar_final, spec, ctx);
                t.lidar_final = next;
                if (a.kind == AttackKind::frustum_translate && result && !t.attack) {
                    t.attack = result;
                    t.attacked_node_id = spec.target_id;
                }
            } catch (const Infeasible&) {
                t.attack_feasible = false;
                break;
            } catch (const UnknownTarget&) {
                t.attack_feasible = false;
                break;
            }
        }
    }

    if (config.camera_graph.source == CameraGraphConfig::Source::import_files) {
        std::string path = replace_all(config.camera_graph.import_pattern, "{trial}",
                                       std::to_string(trial_index));
        t.g_cam = import_external_graph(read_json_file(path),
                                        config.camera_graph.strict_predicates);
    } else {
        t.g_cam = build_graph_monocular(t.camera_detections, config.scene.camera,
                                        config.relations, config.scene.priors);
    }
    t.g_lidar_benign = build_graph_lidar(t.lidar_benign, config.scene.ego,
                                         config.scene.camera, config.relations);
    t.g_lidar = t.attacked ? build_graph_lidar(t.lidar_final, config.scene.ego,
                                               config.scene.camera, config.relations)
                           : t.g_lidar_benign;

    // Flips are counted on canonical (reduced) edge sets so each complement
    // pair counts once.
    std::set<GraphEdge> before = reduce_graph(t.g_lidar_benign).edge_set();
    std::set<GraphEdge> after = reduce_graph(t.g_lidar).edge_set();
    int flips = 0;
    for (const GraphEdge& e : before) {
        if (!after.count(e)) ++flips;
    }
    for (const GraphEdge& e : after) {
        if (!before.count(e)) ++flips;
    }
    t.relation_flips = flips;

    NodeMatch match = match_nodes(t.g_cam, t.g_lidar, t.camera_detections, t.lidar_final,
                                  config.scene.camera, config.match_threshold);
    t.report = cross_check(t.g_cam, t.g_lidar, match, VocabMap::defaults());
    for (const Violation& v : check_constraints(t.g_cam, config.kb)) {
        t.report.violations.push_back(v);
    }
    for (const Violation& v : check_constraints(t.g_lidar, config.kb)) {
        t.report.violations.push_back(v);
    }
    AttackConstraints hyp_constraints =
        config.attacks.empty() ? AttackConstraints{} : config.attacks.front().constraints;
    t.report.hypotheses = hypothesize_perturbation(
        t.report, t.g_cam, t.g_lidar, t.camera_detections, t.lidar_final,
        hyp_constraints, config.integrity_context());

    Assignment assignment = solve_assignment(
        build_cost_matrix(t.camera_detections, t.lidar_final, config.scene.camera),
        config.assignment_gate);
    t.fused = graph_informed_fuse(assignment, t.camera_detections, t.lidar_final,
                                  t.report, config.scene.camera, config.scene.priors);
    return t;
}

RunReport run_scenario(const ScenarioConfig& config) {
    RunReport report;
    report.config_digest = digest_hex(config.to_json().dump());
    for (int i = 0; i < config.trials; ++i) {
        report.trials.push_back(run_trial(config, i, true));
    }
    report.metrics = compute_metrics(report.trials);
    return report;
}

Metrics compute_metrics(const std::vector<TrialRecord>& trials) {
    if (trials.empty()) throw EmptyInput("compute_metrics needs at least one trial");
    Metrics m;
    m.trial_count = static_cast<int>(trials.size());
    int benign = 0;
    int benign_alarms = 0;
    int detected = 0;
    int no_flip = 0;
    double disp_sum = 0.0;
    double iou_sum = 0.0;
    for (const TrialRecord& t : trials) {
        if (!t.attacked) {
            ++benign;
            if (t.inconsistent_labels() > 0) ++benign_alarms;
            continue;
        }
        ++m.attacked_count;
        if (!t.attack_feasible || !t.attack) continue;
        ++m.feasible_count;
        disp_sum += t.attack->displacement_m;
        iou_sum += t.attack->achieved_iou;
        m.max_displacement_m = std::max(m.max_displacement_m, t.attack->displacement_m);
        if (t.detected()) ++detected;
        if (t.relation_flips == 0) ++no_flip;
    }
    if (m.feasible_count > 0) {
        m.attack_detection_rate = static_cast<double>(detected) / m.feasible_count;
        m.no_flip_fraction = static_cast<double>(no_flip) / m.feasible_count;
        m.mean_displacement_m = disp_sum / m.feasible_count;
        m.mean_achieved_iou = iou_sum / m.feasible_count;
    }
    if (benign > 0) {
        m.false_alarm_rate = static_cast<double>(benign_alarms) / benign;
    }
    return m;
}

// --- graph export ---

namespace {

std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

}  // namespace

std::string export_graph(const SceneGraph& g, GraphFormat format,
                         const ConsistencyReport* report) {
    if (format == GraphFormat::json) {
        return graph_to_json(g).dump(2) + "\n";
    }
    const std::map<GraphEdge, Label>* labels = nullptr;
    if (report) {
        labels = g.sensor == Sensor::camera ? &report->camera_edge_labels
                                            : &report->lidar_edge_labels;
    }
    std::ostringstream os;
    os << "digraph scene_graph {\n";
    os << "  rankdir=LR;\n";
    os << "  node [shape=box, style=\"rounded,filled\", fillcolor=lightblue];\n";
    for (const GraphNode& n : g.nodes) {
        os << "  \"" << dot_escape(n.id) << "\" [label=\"" << to_string(n.cls) << "\\n("
           << dot_escape(n.id) << ")\"];\n";
    }
    for (const GraphEdge& e : g.edges) {
        bool inconsistent = false;
        if (labels) {
            auto it = labels->find(e);
            inconsistent = it != labels->end() && it->second == Label::inconsistent;
        }
        os << "  \"" << dot_escape(e.subject) << "\" -> \"" << dot_escape(e.object)
           << "\" [label=\"" << to_string(e.predicate) << "\", color=red";
        if (inconsistent) os << ", style=dashed, penwidth=2";
        os << "];\n";
    }
    os << "}\n";
    return os.str();
}

// --- schema validators ---

void validate_graph_document(const Json& doc) {
    if (!doc.is_object()) throw SchemaViolation("graph: expected an object");
    if (!doc.contains("sensor") || !doc["sensor"].is_string() ||
        (doc["sensor"] != "camera" && doc["sensor"] != "lidar")) {
        throw SchemaViolation("graph.sensor: expected \"camera\" or \"lidar\"");
    }
    if (!doc.contains("reduced") || !doc["reduced"].is_boolean()) {
        throw SchemaViolation("graph.reduced: expected a boolean");
    }
    if (!doc.contains("nodes") || !doc["nodes"].is_array() || !doc.contains("edges") ||
        !doc["edges"].is_array()) {
        throw SchemaViolation("graph: nodes and edges must be arrays");
    }
    std::set<std::string> ids;
    for (const auto& n : doc["nodes"]) {
        if (!n.is_object() || !n.contains("id") || !n["id"].is_string() ||
            !n.contains("class") || !n["class"].is_string()) {
            throw SchemaViolation("graph.nodes: entries must be {id, class} strings");
        }
        if (!class_from_string(n["class"].get<std::string>())) {
            throw SchemaViolation("graph.nodes: unknown class " +
                                  n["class"].get<std::string>());
        }
        if (!ids.insert(n["id"].get<std::string>()).second) {
            throw SchemaViolation("graph.nodes: duplicate id");
        }
    }
    std::set<std::array<std::string, 3>> seen;
    for (const auto& e : doc["edges"]) {
        if (!e.is_object() || !e.contains("subject") || !e.contains("predicate") ||
            !e.contains("object") || !e["subject"].is_string() ||
            !e["predicate"].is_string() || !e["object"].is_string()) {
            throw SchemaViolation(
                "graph.edges: entries must be {subject, predicate, object}");
        }
        std::string subj = e["subject"].get<std::string>();
        std::string obj = e["object"].get<std::string>();
        if (!ids.count(subj) || !ids.count(obj)) {
            throw SchemaViolation("graph.edges: dangling node reference");
        }
        if (subj == obj) throw SchemaViolation("graph.edges: self loop");
        if (!predicate_from_string(e["predicate"].get<std::string>())) {
            throw SchemaViolation("graph.edges: unknown predicate " +
                                  e["predicate"].get<std::string>());
        }
        if (!seen.insert({subj, e["predicate"].get<std::string>(), obj}).second) {
            throw SchemaViolation("graph.edges: duplicate edge");
        }
    }
}

namespace {

void require(bool cond, const std::string& message) {
    if (!cond) throw SchemaViolation(message);
}

void validate_consistency_document(const Json& doc) {
    require(doc.is_object(), "consistency: expected an object");
    for (const char* field : {"node_labels", "edge_labels", "violations", "hypotheses"}) {
        require(doc.contains(field), std::string("consistency.") + field + ": missing");
    }
    for (const char* sensor : {"camera", "lidar"}) {
        require(doc["node_labels"].contains(sensor),
                "consistency.node_labels: missing sensor map");
        for (const auto& [id, label] : doc["node_labels"][sensor].items()) {
            require(label.is_string() &&
                        (label == "consistent" || label == "inconsistent" ||
                         label == "unknown"),
                    "consistency.node_labels: bad label for " + id);
        }
        require(doc["edge_labels"].contains(sensor) &&
                    doc["edge_labels"][sensor].is_array(),
                "consistency.edge_labels: missing sensor array");
        for (const auto& e : doc["edge_labels"][sensor]) {
            require(e.contains("subject") && e.contains("predicate") &&
                        e.contains("object") && e.contains("label"),
                    "consistency.edge_labels: incomplete entry");
        }
    }
    require(doc["violations"].is_array(), "consistency.violations: expected an array");
    require(doc["hypotheses"].is_array(), "consistency.hypotheses: expected an array");
    for (const auto& h : doc["hypotheses"]) {
        require(h.contains("suspect") && h.contains("kind") && h.contains("score"),
                "consistency.hypotheses: incomplete entry");
        double score = h["score"].get<double>();
        require(score >= 0.0 && score <= 1.0,
                "consistency.hypotheses: score out of range");
    }
}

}  // namespace

void validate_run_report_document(const Json& doc) {
    require(doc.is_object(), "report: expected an object");
    require(doc.contains("schema_version") && doc["schema_version"].is_number_integer(),
            "report.schema_version: missing");
    require(doc.contains("config_digest") && doc["config_digest"].is_string(),
            "report.config_digest: missing");
    require(doc.contains("trials") && doc["trials"].is_array(), "report.trials: missing");
    require(doc.contains("metrics") && doc["metrics"].is_object(),
            "report.metrics: missing");
    for (const auto& t : doc["trials"]) {
        require(t.contains("index") && t.contains("seed") && t.contains("scene_digest") &&
                    t.contains("attacked") && t.contains("graphs") &&
                    t.contains("consistency") && t.contains("fused") &&
                    t.contains("relation_flips"),
                "report.trials: incomplete trial record");
        require(t["graphs"].contains("camera") && t["graphs"].contains("lidar"),
                "report.trials.graphs: camera and lidar graphs required");
        validate_graph_document(t["graphs"]["camera"]);
        validate_graph_document(t["graphs"]["lidar"]);
        if (t["attacked"].get<bool>() && t["graphs"].contains("lidar_attacked")) {
            validate_graph_document(t["graphs"]["lidar_attacked"]);
        }
        validate_consistency_document(t["consistency"]);
        require(t["fused"].is_array(), "report.trials.fused: expected an array");
        for (const auto& f : t["fused"]) {
            require(f.contains("position") && f.contains("class") &&
                        f.contains("weight") && f.contains("flagged"),
                    "report.trials.fused: incomplete entry");
            double w = f["weight"].get<double>();
            require(w >= 0.0 && w <= 1.0, "report.trials.fused: weight out of range");
            require((w == 0.0) == f["flagged"].get<bool>(),
                    "report.trials.fused: flagged must mean zero weight");
        }
    }
    const Json& m = doc["metrics"];
    for (const char* field : {"trials", "attacked_trials", "feasible_attacks",
                              "mean_displacement_m", "max_displacement_m",
                              "mean_achieved_iou"}) {
        require(m.contains(field), std::string("report.metrics.") + field + ": missing");
    }
    for (const char* rate :
         {"attack_detection_rate", "false_alarm_rate", "no_flip_fraction"}) {
        if (m.contains(rate)) {
            double v = m[rate].get<double>();
            require(v >= 0.0 && v <= 1.0,
                    std::string("report.metrics.") + rate + ": out of range");
        }
    }
}

void validate_manifest_document(const Json& doc) {
    require(doc.is_object(), "manifest: expected an object");
    for (const char* field : {"schema_version", "config_digest", "count",
                              "attacked_count", "records", "predicate_counts"}) {
        require(doc.contains(field), std::string("manifest.") + field + ": missing");
    }
    require(doc["records"].is_array(), "manifest.records: expected an array");
    require(static_cast<int>(doc["records"].size()) == doc["count"].get<int>(),
            "manifest.count: does not match records");
    int attacked = 0;
    for (const auto& r : doc["records"]) {
        require(r.contains("dir") && r.contains("seed") && r.contains("attacked") &&
                    r.contains("files"),
                "manifest.records: incomplete entry");
        if (r["attacked"].get<bool>()) ++attacked;
    }
    require(attacked == doc["attacked_count"].get<int>(),
            "manifest.attacked_count: does not match records");
    for (const auto& [name, count] : doc["predicate_counts"].items()) {
        require(predicate_from_string(name).has_value(),
                "manifest.predicate_counts: unknown predicate " + name);
        require(count.is_number_integer() && count.get<int>() >= 0,
                "manifest.predicate_counts: bad count");
    }
}

// --- dataset generation ---

Json generate_dataset(const ScenarioConfig& config, int count,
                      const std::string& out_dir) {
    if (count < 1) throw ConfigError("dataset count must be >= 1");
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(fs::path(out_dir) / "records", ec);
    if (ec) throw IoFailure("cannot create " + out_dir + ": " + ec.message());

    bool attacks_configured = !config.attacks.empty();
    double frac = config.dataset_attack_fraction;
    std::map<std::string, int> predicate_counts;
    auto count_edges = [&](const SceneGraph& g) {
        for (const GraphEdge& e : g.edges) ++predicate_counts[to_string(e.predicate)];
    };

    Json records = Json::array();
    int attacked_count = 0;
    for (int i = 0; i < count; ++i) {
        bool attacked = attacks_configured &&
                        std::floor((i + 1) * frac) > std::floor(i * frac);
        TrialRecord t = run_trial(config, i, attacked);

        std::ostringstream name;
        name << std::setw(6) << std::setfill('0') << i;
        fs::path rel = fs::path("records") / name.str();
        fs::path dir = fs::path(out_dir) / rel;
        fs::create_directories(dir, ec);
        if (ec) throw IoFailure("cannot create " + dir.string());

        std::vector<std::string> files;
        auto emit = [&](const std::string& fname, const Json& body) {
            write_text_file((dir / fname).string(), body.dump(2) + "\n");
            files.push_back(fname);
        };
        emit("scene.json", scene_to_json(t.scene));
        emit("camera_detections.json", detections_to_json(t.camera_detections));
        emit("lidar_detections.json", detections_to_json(t.lidar_benign));
        emit("graph_camera.json", graph_to_json(t.g_cam));
        emit("graph_lidar_full.json", graph_to_json(t.g_lidar_benign));
        emit("graph_lidar_reduced.json", graph_to_json(reduce_graph(t.g_lidar_benign)));
        count_edges(t.g_cam);
        count_edges(t.g_lidar_benign);
        count_edges(reduce_graph(t.g_lidar_benign));
        if (t.attacked) {
            ++attacked_count;
            emit("lidar_detections_attacked.json", detections_to_json(t.lidar_final));
            emit("graph_lidar_attacked_full.json", graph_to_json(t.g_lidar));
            emit("graph_lidar_attacked_reduced.json",
                 graph_to_json(reduce_graph(t.g_lidar)));
            count_edges(t.g_lidar);
            count_edges(reduce_graph(t.g_lidar));
            emit("attack.json", t.attack ? attack_result_to_json(*t.attack)
                                         : Json{{"target_id", t.attacked_node_id},
                                                {"feasible", false}});
        }
        records.push_back({{"dir", rel.string()},
                           {"seed", t.seed},
                           {"attacked", t.attacked},
                           {"files", files}});
    }

    Json manifest;
    manifest["schema_version"] = 1;
    manifest["config_digest"] = digest_hex(config.to_json().dump());
    manifest["count"] = count;
    manifest["attacked_count"] = attacked_count;
    manifest["records"] = records;
    Json counts = Json::object();
    for (const auto& [name, n] : predicate_counts) counts[name] = n;
    manifest["predicate_counts"] = counts;
    write_text_file((std::filesystem::path(out_dir) / "manifest.json").string(),
                    manifest.dump(2) + "\n");
    return manifest;
}

Json frame_bundle_to_json(const TrialRecord& t) {
    Json doc;
    doc["schema_version"] = 1;
    doc["seed"] = t.seed;
    doc["scene"] = scene_to_json(t.scene);
    doc["detections"] = {{"camera", detections_to_json(t.camera_detections)},
                         {"lidar_benign", detections_to_json(t.lidar_benign)},
                         {"lidar", detections_to_json(t.lidar_final)}};
    doc["attacked"] = t.attacked;
    if (t.attacked && t.attack) {
        doc["attack"] = attack_result_to_json(*t.attack);
    } else if (t.attacked) {
        doc["attack"] = {{"target_id", t.attacked_node_id}, {"feasible", false}};
    } else {
        doc["attack"] = nullptr;
    }
    doc["attacked_node"] = t.attacked_node_id.empty() ? Json(nullptr)
                                                      : Json(t.attacked_node_id);
    return doc;
}

}  // namespace sgsim

#include <json.hpp>

#include "h2r/common/errors.hpp"
#include "h2r/env/environment.hpp"

namespace h2r::env {
namespace {

using nlohmann::json;

json vec(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

template <int N>
Eigen::Matrix<double, N, 1> read_vec(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != N)
    throw ConfigError("expected array of " + std::to_string(N) + " numbers", path);
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) v(i) = j.at(i).get<double>();
  return v;
}

}  // namespace

json scene_to_json(const SceneDescription& scene) {
  json objects = json::array();
  for (const auto& o : scene.objects) {
    const Quat& q = o.pose.orientation;
    objects.push_back({{"id", o.id},
                       {"shape", to_string(o.shape.kind)},
                       {"dims", vec(o.shape.dims)},
                       {"position", vec(o.pose.position)},
                       {"quaternion", {q.w(), q.x(), q.y(), q.z()}},
                       {"color", o.color},
                       {"category", o.category}});
  }
  return {{"workspace",
           {{"x", {scene.workspace.x_min, scene.workspace.x_max}},
            {"y", {scene.workspace.y_min, scene.workspace.y_max}},
            {"z0", scene.workspace.z0}}},
          {"objects", objects},
          {"target", scene.target_id},
          {"destination", scene.destination_id},
          {"goal", vec(scene.goal)},
          {"task", to_string(scene.task)},
          {"joints", vec(scene.joints)}};
}

SceneDescription scene_from_json(const json& j) {
  SceneDescription s;
  try {
    const json& ws = j.at("workspace");
    s.workspace.x_min = ws.at("x").at(0).get<double>();
    s.workspace.x_max = ws.at("x").at(1).get<double>();
    s.workspace.y_min = ws.at("y").at(0).get<double>();
    s.workspace.y_max = ws.at("y").at(1).get<double>();
    s.workspace.z0 = ws.value("z0", 0.0);
    const json& objs = j.at("objects");
    for (std::size_t i = 0; i < objs.size(); ++i) {
      const json& o = objs[i];
      const std::string path = "/objects/" + std::to_string(i);
      SceneObject obj;
      obj.id = o.at("id").get<int>();
      obj.shape.kind = shape_kind_from_string(o.at("shape").get<std::string>());
      obj.shape.dims = read_vec<3>(o.at("dims"), path + "/dims");
      obj.pose.position = read_vec<3>(o.at("position"), path + "/position");
      const Eigen::Vector4d q = read_vec<4>(o.at("quaternion"), path + "/quaternion");
      obj.pose.orientation = Quat(q(0), q(1), q(2), q(3));
      if (std::abs(obj.pose.orientation.norm() - 1.0) > 1e-9)
        throw ConfigError("quaternion must be unit norm", path + "/quaternion");
      obj.color = o.value("color", "");
      obj.category = o.value("category", "");
      if (!obj.shape.valid()) throw ConfigError("dims must be positive", path + "/dims");
      s.objects.push_back(obj);
    }
    s.target_id = j.at("target").get<int>();
    s.destination_id = j.value("destination", -1);
    s.goal = read_vec<3>(j.at("goal"), "/goal");
    s.task = task_from_string(j.value("task", "reach"));
    if (j.contains("joints")) s.joints = read_vec<6>(j.at("joints"), "/joints");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed scene: ") + e.what());
  }
  return s;
}

}  // namespace h2r::env

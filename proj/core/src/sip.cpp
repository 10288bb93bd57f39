#include "ipromp/sip.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ipromp/errors.hpp"
#include "json.hpp"

namespace ipromp {

double segment_distance(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2) {
  const Vec3 d1 = q1 - p1;
  const Vec3 d2 = q2 - p2;
  const Vec3 r = p1 - p2;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);
  constexpr double eps = 1e-30;
  double s = 0.0;
  double t = 0.0;
  if (a <= eps && e <= eps) return r.norm();
  if (a <= eps) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= eps) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      if (denom > eps) s = std::clamp((b * f - c * e) / denom, 0.0, 1.0);
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return ((p1 + s * d1) - (p2 + t * d2)).norm();
}

bool stem_occludes_approach(const Stem& stem, const Fruit& target, const ClusterScene& scene) {
  const Vec3 tip = stem.root + stem.length * stem.direction;
  const Vec3 approach_lo = target.position - kApproachDepth * scene.frame.k;
  return segment_distance(stem.root, tip, approach_lo, target.position) <= scene.gripper_radius;
}

OcclusionSubsets split_subsets(const std::vector<Fruit>& cluster, const Fruit& target,
                               const TableTopFrame& frame, double r_g_max) {
  if (!(r_g_max > 0.0)) throw ValidationError("split_subsets: r_g_max must be positive");
  OcclusionSubsets subsets;
  for (const Fruit& f : cluster) {
    const Vec3 d = f.position - target.position;
    if (std::abs(frame.i.dot(d)) > r_g_max) continue;  // outside the approach corridor
    const double dz = frame.k.dot(d);
    if (dz < -kLevelTolerance)
      subsets.below.push_back(f);
    else if (dz > kLevelTolerance)
      subsets.above.push_back(f);
    else
      subsets.level.push_back(f);
  }
  return subsets;
}

namespace {

bool fruit_stem_occludes(const Fruit& f, const Fruit& target, const ClusterScene& scene) {
  if (!f.stem_id) return false;
  const Stem* stem = scene.find_stem(*f.stem_id);
  if (!stem) throw ValidationError("subset_opt: fruit references unknown stem " + *f.stem_id);
  return stem_occludes_approach(*stem, target, scene);
}

double stem_uprightness(const Fruit& f, const ClusterScene& scene) {
  if (!f.stem_id) return -2.0;  // detached fruits lose the uprightness tiebreak
  const Stem* stem = scene.find_stem(*f.stem_id);
  return stem ? scene.frame.k.dot(stem->direction) : -2.0;
}

}  // namespace

std::vector<Fruit> subset_opt(const OcclusionSubsets& subsets, const Fruit& target,
                              const ClusterScene& scene) {
  std::vector<Fruit> pool = subsets.below;
  std::sort(pool.begin(), pool.end(), [&](const Fruit& a, const Fruit& b) {
    const double za = scene.frame.k.dot(a.position);
    const double zb = scene.frame.k.dot(b.position);
    return za != zb ? za < zb : a.id < b.id;
  });

  std::vector<Fruit> kept;
  std::size_t start = 0;
  while (start < pool.size()) {
    const double base_z = scene.frame.k.dot(pool[start].position);
    std::size_t end = start + 1;
    while (end < pool.size() &&
           scene.frame.k.dot(pool[end].position) - base_z <= kLevelTolerance)
      ++end;
    if (end - start == 1) {
      kept.push_back(pool[start]);
    } else {
      // Quasi-equal group: prefer the closest non-occluding candidate along
      // the table-top axis; if every stem occludes, take the most upright one.
      const Fruit* choice = nullptr;
      double best_offset = 0.0;
      for (std::size_t idx = start; idx < end; ++idx) {
        const Fruit& f = pool[idx];
        if (fruit_stem_occludes(f, target, scene)) continue;
        const double off = std::abs(scene.frame.i.dot(f.position - target.position));
        if (!choice || off < best_offset) {
          choice = &f;
          best_offset = off;
        }
      }
      if (!choice) {
        double best_up = 0.0;
        for (std::size_t idx = start; idx < end; ++idx) {
          const double up = stem_uprightness(pool[idx], scene);
          if (!choice || up > best_up) {
            choice = &pool[idx];
            best_up = up;
          }
        }
      }
      kept.push_back(*choice);
    }
    start = end;
  }
  return kept;
}

StemGeometry stem_geometry(const Stem& stem, const TableTopFrame& frame, double r_g_max) {
  if (!(r_g_max > 0.0)) throw ValidationError("stem_geometry: r_g_max must be positive");
  if (std::abs(stem.direction.norm() - 1.0) > 1e-9)
    throw ValidationError("stem_geometry: stem direction must be a unit vector");
  if (stem.length <= r_g_max)
    throw NumericalError("stem_geometry: stem " + stem.id +
                         " is shorter than the clearance radius; cannot swing clear");
  double cos0 = frame.k.dot(stem.direction);
  if (cos0 > 1.0 + 1e-9 || cos0 < -1.0 - 1e-9)
    throw ValidationError("stem_geometry: stem direction not normalized");
  cos0 = std::clamp(cos0, -1.0, 1.0);

  StemGeometry g;
  g.theta0 = std::acos(cos0);
  g.theta = std::asin(r_g_max / stem.length);
  g.d_theta = std::max(g.theta - g.theta0, 0.0);
  g.displacement = stem.length * std::sqrt(2.0 * (1.0 - std::cos(g.d_theta)));
  return g;
}

Vec3 get_dir(const Fruit& fruit, const std::vector<Fruit>& selected, const Fruit& target,
             const TableTopFrame& frame) {
  const double z = frame.k.dot(fruit.position);
  for (const Fruit& other : selected) {
    if (other.id == fruit.id) continue;
    if (std::abs(frame.k.dot(other.position) - z) <= kLevelTolerance)
      return -frame.k;  // shared height: push downward, normal to the table top
  }
  const double off = frame.i.dot(fruit.position - target.position);
  const double side = off >= 0.0 ? 1.0 : -1.0;  // widen the corridor offset
  return side * frame.i;
}

PushPlan plan_pushes(const ClusterScene& scene, const std::string& target_id) {
  const Fruit* target = scene.find_fruit(target_id);
  if (!target) throw ValidationError("plan_pushes: unknown target fruit " + target_id);
  if (!target->ripe) throw ValidationError("plan_pushes: target " + target_id + " is not ripe");

  PushPlan plan;
  plan.target_id = target_id;

  const std::vector<Fruit> cluster =
      radius_nearest_neighbours(scene, *target, kNeighbourRadius);
  const OcclusionSubsets subsets =
      split_subsets(cluster, *target, scene.frame, scene.gripper_radius);
  const std::vector<Fruit> selected = subset_opt(subsets, *target, scene);

  for (const Fruit& f : selected) {
    if (!f.stem_id) {  // detached occluders cannot be rotated out of the way
      plan.partial = true;
      plan.unhandled.push_back(f.id);
      continue;
    }
    const Stem* stem = scene.find_stem(*f.stem_id);
    if (!stem) throw ValidationError("plan_pushes: fruit references unknown stem " + *f.stem_id);
    StemGeometry geom;
    try {
      geom = stem_geometry(*stem, scene.frame, scene.gripper_radius);
    } catch (const NumericalError&) {
      plan.partial = true;
      plan.unhandled.push_back(f.id);
      continue;
    }
    PushDirective d;
    d.fruit_id = f.id;
    d.push_dir = get_dir(f, selected, *target, scene.frame);
    d.d_theta = geom.d_theta;
    d.displacement = geom.displacement;
    d.original_position = f.position;
    d.updated_position = f.position + geom.displacement * d.push_dir;
    d.stem_direction = stem->direction;
    plan.directives.push_back(std::move(d));
  }
  return plan;
}

namespace {

nlohmann::json vec3_json(const Vec3& v) { return nlohmann::json{v.x(), v.y(), v.z()}; }

Vec3 vec3_from(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 3)
    throw IoError(std::string("plan JSON: expected a 3-vector for ") + what);
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

std::string to_json_string(const PushPlan& plan) {
  nlohmann::json j;
  j["target_id"] = plan.target_id;
  j["directives"] = nlohmann::json::array();
  for (const PushDirective& d : plan.directives) {
    nlohmann::json dj;
    dj["fruit_id"] = d.fruit_id;
    dj["u_p"] = vec3_json(d.push_dir);
    dj["d_theta"] = d.d_theta;
    dj["s"] = d.displacement;
    dj["original_position"] = vec3_json(d.original_position);
    dj["updated_position"] = vec3_json(d.updated_position);
    dj["stem_direction"] = vec3_json(d.stem_direction);
    j["directives"].push_back(std::move(dj));
  }
  if (plan.partial) {
    j["partial"] = true;
    j["unhandled"] = plan.unhandled;
  }
  return j.dump(2);
}

PushPlan plan_from_json_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("plan JSON parse failure: ") + e.what());
  }
  try {
    PushPlan plan;
    plan.target_id = j.at("target_id").get<std::string>();
    for (const auto& dj : j.at("directives")) {
      PushDirective d;
      d.fruit_id = dj.at("fruit_id").get<std::string>();
      d.push_dir = vec3_from(dj.at("u_p"), "u_p");
      d.d_theta = dj.at("d_theta").get<double>();
      d.displacement = dj.at("s").get<double>();
      d.original_position = vec3_from(dj.at("original_position"), "original_position");
      d.updated_position = vec3_from(dj.at("updated_position"), "updated_position");
      d.stem_direction = vec3_from(dj.at("stem_direction"), "stem_direction");
      plan.directives.push_back(std::move(d));
    }
    if (j.contains("partial")) {
      plan.partial = j.at("partial").get<bool>();
      for (const auto& id : j.at("unhandled")) plan.unhandled.push_back(id.get<std::string>());
    }
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("plan JSON structure failure: ") + e.what());
  }
}

void save_plan(const PushPlan& plan, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << to_json_string(plan) << '\n';
  if (!out) throw IoError("write failure: " + path);
}

PushPlan load_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return plan_from_json_string(text);
}

}  // namespace ipromp

#include "ipromp/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "ipromp/errors.hpp"

namespace ipromp {

namespace {

struct Section {
  double xi = 0.0;   // radial offset from the gripper axis
  double eta = 0.0;  // depth below the vertex
};

Section cross_section(const TableTopFrame& frame, const Vec3& gripper_pos, const Vec3& point) {
  const Vec3 d = point - gripper_pos;
  const double along_k = frame.k.dot(d);
  Section s;
  s.xi = (d - along_k * frame.k).norm();
  s.eta = -along_k;
  return s;
}

double point_segment_distance_2d(double px, double py, double ax, double ay, double bx,
                                 double by) {
  const double dx = bx - ax;
  const double dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double cx = ax + t * dx;
  const double cy = ay + t * dy;
  return std::hypot(px - cx, py - cy);
}

bool inside_cone(const GripperModel& g, const Section& s) {
  return s.eta >= 0.0 && s.eta <= g.height && g.height * s.xi - g.radius * s.eta <= 0.0;
}

Vec3 rotate_about(const Vec3& v, const Vec3& axis, double angle) {
  const double c = std::cos(angle);
  const double sn = std::sin(angle);
  return v * c + axis.cross(v) * sn + axis * (axis.dot(v) * (1.0 - c));
}

Vec3 any_perpendicular(const Vec3& v) {
  Vec3 trial = v.cross(Vec3::UnitX());
  if (trial.norm() < 1e-9) trial = v.cross(Vec3::UnitY());
  return trial.normalized();
}

}  // namespace

double cone_signed_distance(const GripperModel& gripper, const TableTopFrame& frame,
                            const Vec3& gripper_pos, const Vec3& point) {
  const Section s = cross_section(frame, gripper_pos, point);
  const double R = gripper.radius;
  const double H = gripper.height;
  if (inside_cone(gripper, s)) {
    const double slant = (R * s.eta - H * s.xi) / std::hypot(R, H);
    return -std::min(slant, H - s.eta);
  }
  const double to_slant = point_segment_distance_2d(s.xi, s.eta, 0.0, 0.0, R, H);
  const double to_base = point_segment_distance_2d(s.xi, s.eta, 0.0, H, R, H);
  return std::min(to_slant, to_base);
}

Vec3 cone_outward_normal(const GripperModel& gripper, const TableTopFrame& frame,
                         const Vec3& gripper_pos, const Vec3& point) {
  const Section s = cross_section(frame, gripper_pos, point);
  const double R = gripper.radius;
  const double H = gripper.height;
  const double norm_slant = std::hypot(R, H);

  // Closest surface point in the cross-section, slant edge vs. base edge.
  auto closest_on = [&](double ax, double ay, double bx, double by) {
    const double dx = bx - ax;
    const double dy = by - ay;
    double t = ((s.xi - ax) * dx + (s.eta - ay) * dy) / (dx * dx + dy * dy);
    t = std::clamp(t, 0.0, 1.0);
    return std::pair<double, double>{ax + t * dx, ay + t * dy};
  };
  const auto on_slant = closest_on(0.0, 0.0, R, H);
  const auto on_base = closest_on(0.0, H, R, H);
  const double d_slant = std::hypot(s.xi - on_slant.first, s.eta - on_slant.second);
  const double d_base = std::hypot(s.xi - on_base.first, s.eta - on_base.second);
  const bool slant_closer = d_slant <= d_base;
  const auto q = slant_closer ? on_slant : on_base;
  const double dist = slant_closer ? d_slant : d_base;

  double nxi, neta;
  if (dist > 1e-12) {
    const double sign = inside_cone(gripper, s) ? -1.0 : 1.0;
    nxi = sign * (s.xi - q.first) / dist;
    neta = sign * (s.eta - q.second) / dist;
  } else if (slant_closer) {  // on the slant: use its geometric outward normal
    nxi = H / norm_slant;
    neta = -R / norm_slant;
  } else {  // on the base: outward is straight down
    nxi = 0.0;
    neta = 1.0;
  }

  const Vec3 d = point - gripper_pos;
  const Vec3 radial = d - frame.k.dot(d) * frame.k;
  const Vec3 e_rho = radial.norm() > 1e-12 ? Vec3(radial.normalized()) : frame.i;
  return (nxi * e_rho - neta * frame.k).normalized();
}

void step(ClusterScene& state, const ClusterScene& rest, const Vec3& gripper_pos, double dt,
          const SimParams& params) {
  if (!gripper_pos.allFinite()) throw ValidationError("step: non-finite gripper position");

  auto attached_fruit = [&](const std::string& stem_id) -> Fruit* {
    for (Fruit& f : state.fruits)
      if (f.stem_id && *f.stem_id == stem_id) return &f;
    return nullptr;
  };

  if (params.spring_back_rate > 0.0 && dt > 0.0) {
    for (Stem& stem : state.stems) {
      const Stem* home = rest.find_stem(stem.id);
      if (!home) continue;
      const double off = std::acos(std::clamp(stem.direction.dot(home->direction), -1.0, 1.0));
      if (off < 1e-12) continue;
      const Vec3 axis_raw = stem.direction.cross(home->direction);
      if (axis_raw.norm() < 1e-12) continue;
      const double back = std::min(params.spring_back_rate * dt, off);
      stem.direction = rotate_about(stem.direction, axis_raw.normalized(), back).normalized();
      if (Fruit* f = attached_fruit(stem.id))
        f->position = stem.root + stem.length * stem.direction;
    }
  }

  for (Fruit& f : state.fruits) {
    if (!f.stem_id) continue;  // detached fruits are immovable obstacles
    Stem* stem = nullptr;
    for (Stem& s : state.stems)
      if (s.id == *f.stem_id) stem = &s;
    if (!stem) throw ValidationError("step: fruit references unknown stem " + *f.stem_id);

    const double clearance =
        cone_signed_distance(params.gripper, state.frame, gripper_pos, f.position) - f.radius;
    if (clearance >= 0.0) continue;

    const Vec3 outward =
        cone_outward_normal(params.gripper, state.frame, gripper_pos, f.position);
    Vec3 axis = stem->direction.cross(outward);
    if (axis.norm() < 1e-12)
      axis = any_perpendicular(stem->direction);
    else
      axis.normalize();

    const Vec3 u0 = stem->direction;
    auto clearance_at = [&](double angle) {
      const Vec3 u = rotate_about(u0, axis, angle).normalized();
      const Vec3 p = stem->root + stem->length * u;
      return cone_signed_distance(params.gripper, state.frame, gripper_pos, p) - f.radius;
    };

    constexpr double max_angle = M_PI / 2.0;
    double lo = 0.0;
    double hi = max_angle / 32.0;
    bool bracketed = false;
    while (hi <= max_angle + 1e-12) {
      if (clearance_at(std::min(hi, max_angle)) >= 0.0) {
        bracketed = true;
        break;
      }
      lo = hi;
      hi *= 2.0;
    }
    if (!bracketed) throw JamError(f.id);
    hi = std::min(hi, max_angle);
    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (clearance_at(mid) >= 0.0)
        hi = mid;
      else
        lo = mid;
    }
    stem->direction = rotate_about(u0, axis, hi).normalized();
    f.position = stem->root + stem->length * stem->direction;
  }
}

SimTrace replay(const ClusterScene& scene, const Trajectory& trajectory,
                const SimParams& params) {
  scene.validate();
  if (trajectory.times.size() != trajectory.points.size())
    throw ValidationError("replay: trajectory times/points length mismatch");
  if (trajectory.times.empty()) throw ValidationError("replay: empty trajectory");
  for (std::size_t i = 0; i < trajectory.times.size(); ++i) {
    if (!trajectory.points[i].allFinite() || trajectory.points[i].cwiseAbs().maxCoeff() > 10.0)
      throw ValidationError("replay: trajectory point outside the workspace");
    if (i > 0 && trajectory.times[i] <= trajectory.times[i - 1])
      throw ValidationError("replay: trajectory times must be strictly increasing");
  }

  ClusterScene state = scene;
  SimTrace trace;
  for (const Fruit& f : scene.fruits) trace.fruit_ids.push_back(f.id);
  for (const Stem& s : scene.stems) trace.stem_ids.push_back(s.id);
  trace.fruit_paths.resize(scene.fruits.size());
  trace.stem_directions.resize(scene.stems.size());

  for (std::size_t i = 0; i < trajectory.times.size(); ++i) {
    const double dt = i > 0 ? trajectory.times[i] - trajectory.times[i - 1] : 0.0;
    try {
      step(state, scene, trajectory.points[i], dt, params);
    } catch (const JamError& e) {
      trace.jam = JamInfo{i, e.fruit_id};
      break;
    }
    trace.times.push_back(trajectory.times[i]);
    trace.gripper.push_back(trajectory.points[i]);
    for (std::size_t fi = 0; fi < state.fruits.size(); ++fi)
      trace.fruit_paths[fi].push_back(state.fruits[fi].position);
    for (std::size_t si = 0; si < state.stems.size(); ++si)
      trace.stem_directions[si].push_back(state.stems[si].direction);
  }
  return trace;
}

std::vector<ContactMetric> contact_metrics(const SimTrace& trace, const ClusterScene& scene,
                                           const PushPlan& plan) {
  std::vector<std::string> ids{plan.target_id};
  for (const PushDirective& d : plan.directives) ids.push_back(d.fruit_id);
  for (const std::string& id : plan.unhandled) ids.push_back(id);

  std::vector<ContactMetric> out;
  for (const std::string& id : ids) {
    ContactMetric m;
    m.fruit_id = id;
    std::size_t idx = trace.fruit_ids.size();
    for (std::size_t fi = 0; fi < trace.fruit_ids.size(); ++fi)
      if (trace.fruit_ids[fi] == id) idx = fi;
    if (idx == trace.fruit_ids.size())
      throw ValidationError("contact_metrics: fruit " + id + " not present in the trace");

    for (std::size_t tick = 0; tick < trace.times.size(); ++tick) {
      const Vec3& fruit = trace.fruit_paths[idx][tick];
      const Vec3& grip = trace.gripper[tick];
      if (std::abs(scene.frame.k.dot(grip - fruit)) > kLevelTolerance) continue;
      const Vec3 d = fruit - grip;
      const double h = (d - scene.frame.k.dot(d) * scene.frame.k).norm();
      if (!m.applicable) {
        m.applicable = true;
        m.h_min = m.h_max = h;
      } else {
        m.h_min = std::min(m.h_min, h);
        m.h_max = std::max(m.h_max, h);
      }
    }
    if (m.applicable) {
      m.swallowed = m.h_min <= 1e-3;
      m.contact = !m.swallowed && m.h_min <= kGripperMaxRadius + kFruitMaxRadius;
    }
    out.push_back(m);
  }
  return out;
}

void write_trace_csv(const SimTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "t,gripper_x,gripper_y,gripper_z";
  for (const std::string& id : trace.fruit_ids)
    out << ',' << id << "_x," << id << "_y," << id << "_z";
  out << '\n';
  char buf[64];
  auto emit = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  for (std::size_t tick = 0; tick < trace.times.size(); ++tick) {
    emit(trace.times[tick]);
    for (int a = 0; a < 3; ++a) {
      out << ',';
      emit(trace.gripper[tick][a]);
    }
    for (std::size_t fi = 0; fi < trace.fruit_ids.size(); ++fi)
      for (int a = 0; a < 3; ++a) {
        out << ',';
        emit(trace.fruit_paths[fi][tick][a]);
      }
    out << '\n';
  }
  if (!out) throw IoError("write failure: " + path);
}

}  // namespace ipromp

#include "flowplan/barrier.hpp"

#include "flowplan/errors.hpp"

namespace flowplan {

void BarrierSpec::validate(int dim) const {
  switch (kind) {
    case Kind::ellipse:
    case Kind::quartic:
      if (dim < 2) throw ValidationError("planar barrier needs dim >= 2");
      if (!(ax > 0.0) || !(ay > 0.0))
        throw ValidationError("barrier semi-axes must be positive");
      if (!center.allFinite()) throw ValidationError("barrier center not finite");
      break;
    case Kind::halfspace_velocity:
      if (pos_index < 0 || pos_index >= dim || vel_index < 0 || vel_index >= dim)
        throw ValidationError("barrier index out of range");
      if (pos_index == vel_index)
        throw ValidationError("barrier indices must differ");
      if (!std::isfinite(roof) || !std::isfinite(vel_scale))
        throw ValidationError("barrier parameters not finite");
      break;
  }
}

BarrierEval barrier_eval(const BarrierSpec& spec, const Eigen::VectorXd& waypoint) {
  const int dim = static_cast<int>(waypoint.size());
  spec.validate(dim);
  if (!waypoint.allFinite()) throw ValidationError("waypoint not finite");

  BarrierEval out;
  out.grad = Eigen::VectorXd::Zero(dim);
  switch (spec.kind) {
    case BarrierSpec::Kind::ellipse: {
      const double rx = (waypoint[0] - spec.center[0]) / spec.ax;
      const double ry = (waypoint[1] - spec.center[1]) / spec.ay;
      out.value = rx * rx + ry * ry - 1.0;
      out.grad[0] = 2.0 * rx / spec.ax;
      out.grad[1] = 2.0 * ry / spec.ay;
      break;
    }
    case BarrierSpec::Kind::quartic: {
      const double rx = (waypoint[0] - spec.center[0]) / spec.ax;
      const double ry = (waypoint[1] - spec.center[1]) / spec.ay;
      out.value = rx * rx * rx * rx + ry * ry * ry * ry - 1.0;
      out.grad[0] = 4.0 * rx * rx * rx / spec.ax;
      out.grad[1] = 4.0 * ry * ry * ry / spec.ay;
      break;
    }
    case BarrierSpec::Kind::halfspace_velocity: {
      out.value = spec.roof - waypoint[spec.pos_index] -
                  spec.vel_scale * waypoint[spec.vel_index];
      out.grad[spec.pos_index] = -1.0;
      out.grad[spec.vel_index] = -spec.vel_scale;
      break;
    }
  }
  return out;
}

std::string barrier_kind_name(BarrierSpec::Kind kind) {
  switch (kind) {
    case BarrierSpec::Kind::ellipse: return "ellipse";
    case BarrierSpec::Kind::quartic: return "quartic";
    case BarrierSpec::Kind::halfspace_velocity: return "halfspace_velocity";
  }
  throw ValidationError("unknown barrier kind");
}

BarrierSpec::Kind barrier_kind_from_name(const std::string& name) {
  if (name == "ellipse") return BarrierSpec::Kind::ellipse;
  if (name == "quartic") return BarrierSpec::Kind::quartic;
  if (name == "halfspace_velocity") return BarrierSpec::Kind::halfspace_velocity;
  throw ValidationError("unknown barrier kind: " + name);
}

}  // namespace flowplan

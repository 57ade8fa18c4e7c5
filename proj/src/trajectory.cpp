#include "kcbs/trajectory.hpp"

#include <cmath>
#include <stdexcept>

namespace kcbs
{

long wholeSteps(double duration, double step)
{
  const double ratio = duration / step;
  const long k = std::lround(ratio);
  if (k < 1 || std::abs(ratio - static_cast<double>(k)) > 1e-6)
    throw std::invalid_argument("segment duration " + std::to_string(duration) +
                                " is not a positive multiple of the integration step");
  return k;
}

std::vector<double> sampleGrid(double horizon, double dt)
{
  if (!(dt > 0) || horizon < 0)
    throw std::invalid_argument("sampleGrid: need dt > 0 and horizon >= 0");
  std::vector<double> times;
  for (long i = 0;; ++i)
  {
    const double t = static_cast<double>(i) * dt;
    if (t >= horizon - 1e-12)
      break;
    times.push_back(t);
  }
  times.push_back(horizon);
  return times;
}

Trajectory::Trajectory(std::shared_ptr<const RobotModel> model, StateVec start, std::vector<Segment> segments,
                       double step)
    : model_(std::move(model)), segments_(std::move(segments)), step_(step)
{
  if (!model_)
    throw std::invalid_argument("trajectory needs a model");
  if (!(step_ > 0))
    throw std::invalid_argument("trajectory step must be positive");
  if (start.size() != model_->stateDim())
    throw std::invalid_argument("trajectory start state has wrong dimension");
  states_.push_back(std::move(start));
  for (std::size_t s = 0; s < segments_.size(); ++s)
  {
    const Segment& seg = segments_[s];
    if (seg.control.size() != model_->controlDim())
      throw std::invalid_argument("segment control has wrong dimension");
    const long k = wholeSteps(seg.duration, step_);
    duration_ += seg.duration;
    for (long i = 0; i < k; ++i)
    {
      states_.push_back(rk4Step<double>(model_->field, model_->stateSpace, states_.back(), seg.control, step_));
      stepSegment_.push_back(s);
    }
  }
}

StateVec Trajectory::stateAt(double t) const
{
  if (t < 0)
    throw std::invalid_argument("stateAt: negative time");
  if (t >= duration_)
    return states_.back();
  const auto idx = static_cast<std::size_t>(std::floor(t / step_ + 1e-9));
  if (idx >= stepSegment_.size())
    return states_.back();
  const double rest = t - static_cast<double>(idx) * step_;
  if (rest <= 1e-12)
    return states_[idx];
  return rk4Step<double>(model_->field, model_->stateSpace, states_[idx], segments_[stepSegment_[idx]].control, rest);
}

std::vector<std::pair<double, StateVec>> Trajectory::sampleTimes(double horizon, double dt) const
{
  std::vector<std::pair<double, StateVec>> out;
  for (double t : sampleGrid(horizon, dt))
    out.emplace_back(t, stateAt(t));
  return out;
}

}  // namespace kcbs

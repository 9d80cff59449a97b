#include "mcad/window.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace mcad {

WindowSchedule make_schedule(int total_frames, int t_w, int delta_w,
                             int target_offset) {
  if (total_frames < 1) throw std::invalid_argument("make_schedule: total_frames < 1");
  if (t_w < 1) throw std::invalid_argument("make_schedule: window size < 1");
  if (delta_w < 1 || delta_w > t_w)
    throw std::invalid_argument("make_schedule: need 1 <= delta_w <= window size");
  if (target_offset < 0 || target_offset + delta_w > t_w)
    throw std::invalid_argument(
        "make_schedule: target block must fit, need target_offset + delta_w <= window size");

  WindowSchedule sched;
  sched.total_frames = total_frames;
  sched.decided_by.assign(total_frames, -1);
  for (int s = 1; s <= total_frames; s += delta_w) {
    WindowSpec w;
    w.t1 = s;
    w.delta_w = std::min(delta_w, total_frames - s + 1);
    int nominal_t0 = s - target_offset;
    w.t0 = std::max(1, nominal_t0);
    int end = std::min(total_frames, nominal_t0 + t_w - 1);
    w.t_w = end - w.t0 + 1;
    int idx = (int)sched.windows.size();
    for (int f = w.t1; f <= w.target_end(); ++f) sched.decided_by[f - 1] = idx;
    sched.windows.push_back(w);
  }
  return sched;
}

double mean_latency(const WindowSpec& spec) {
  return spec.t0 + spec.t_w - spec.t1 - 0.5 * (spec.delta_w + 1);
}

std::string schedule_table(const WindowSchedule& schedule) {
  std::ostringstream os;
  os << "idx  window      target      latency\n";
  for (size_t i = 0; i < schedule.windows.size(); ++i) {
    const WindowSpec& w = schedule.windows[i];
    os << i << "    [" << w.t0 << "," << w.window_end() << "]    [" << w.t1
       << "," << w.target_end() << "]    " << mean_latency(w) << "\n";
  }
  return os.str();
}

}  // namespace mcad

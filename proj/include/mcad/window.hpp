#pragma once

#include <string>
#include <vector>

namespace mcad {

// One placement of the sliding detection window over 1-based frame indices.
// t_w and delta_w are the actual (possibly truncated) sizes, so the window
// spans {t0 .. t0+t_w-1} and the decided frames are {t1 .. t1+delta_w-1}.
struct WindowSpec {
  int t0 = 1;
  int t_w = 1;
  int t1 = 1;
  int delta_w = 1;

  int window_end() const { return t0 + t_w - 1; }
  int target_end() const { return t1 + delta_w - 1; }
  bool contains(int frame) const { return frame >= t0 && frame <= window_end(); }
  bool decides(int frame) const { return frame >= t1 && frame <= target_end(); }
};

struct WindowSchedule {
  int total_frames = 0;
  std::vector<WindowSpec> windows;
  std::vector<int> decided_by;  // frame t (1-based) -> index into windows

  const WindowSpec& window_for(int frame) const {
    return windows[decided_by[frame - 1]];
  }
};

// Advances the target block by delta_w each placement; nominal window start
// is target start minus target_offset. Leading windows are truncated at
// frame 1 and trailing ones at frame T, keeping every frame decided exactly
// once. Requires delta_w + target_offset <= t_w.
WindowSchedule make_schedule(int total_frames, int t_w, int delta_w,
                             int target_offset);

// Average frames between a decided frame's arrival and the newest frame the
// window waits for: t0 + t_w - t1 - (delta_w+1)/2.
double mean_latency(const WindowSpec& spec);

// Audit table, one row per placement.
std::string schedule_table(const WindowSchedule& schedule);

}  // namespace mcad

#pragma once

// Self-contained tracking-by-detection reference: Kalman prediction, gated
// IOU association solved exactly, track lifecycle. Mirrors the gates and
// parameters of the rule-driven pipeline but shares no code with it.

#include <set>
#include <utility>
#include <vector>

#include "kalman_ref.hpp"

namespace sort_ref {

struct Det {
  double x, y, w, h;
  double score;
};

struct Options {
  double iou_gate = 0.8;
  double score_gate = 0.8;
  int max_age = 3;
  int min_hits = 1;
};

struct FrameEvents {
  std::set<std::pair<long, int>> matched;  // (track id, detection index)
  std::set<std::pair<long, int>> spawned;
  std::set<long> ended;
};

class Tracker {
 public:
  explicit Tracker(Options options = {}) : options_(options) {}

  FrameEvents step(const std::vector<Det>& dets) {
    FrameEvents events;
    for (Track& t : tracks_) t.state = kalman_ref::predict(t.state);

    // Gated candidate edges on predicted boxes.
    std::vector<Edge> edges;
    for (int ti = 0; ti < static_cast<int>(tracks_.size()); ++ti) {
      double px, py, pw, ph;
      state_box(tracks_[ti].state, px, py, pw, ph);
      for (int dj = 0; dj < static_cast<int>(dets.size()); ++dj) {
        if (!(dets[dj].score > options_.score_gate)) continue;
        double v = iou(px, py, pw, ph, dets[dj].x, dets[dj].y, dets[dj].w, dets[dj].h);
        if (v > options_.iou_gate) edges.push_back(Edge{ti, dj, v});
      }
    }

    // Exhaustive max-sum matching over the gated edges.
    std::vector<int> best_assign(tracks_.size(), -1);
    {
      std::vector<int> assign(tracks_.size(), -1);
      std::vector<bool> det_used(dets.size(), false);
      double best = -1.0;
      search(edges, 0, assign, det_used, 0.0, best, best_assign);
    }

    std::vector<bool> det_used(dets.size(), false);
    for (int ti = 0; ti < static_cast<int>(tracks_.size()); ++ti) {
      int dj = ti < static_cast<int>(best_assign.size()) ? best_assign[ti] : -1;
      Track& t = tracks_[ti];
      if (dj >= 0) {
        det_used[dj] = true;
        t.state = kalman_ref::update(t.state, dets[dj].x, dets[dj].y, dets[dj].w, dets[dj].h);
        t.misses = 0;
        ++t.hits;
        events.matched.insert({t.id, dj});
      } else {
        ++t.misses;
      }
    }

    for (int dj = 0; dj < static_cast<int>(dets.size()); ++dj) {
      if (det_used[dj]) continue;
      if (dets[dj].score < options_.score_gate) continue;
      Track t;
      t.id = ++id_counter_;
      t.state = kalman_ref::init(dets[dj].x, dets[dj].y, dets[dj].w, dets[dj].h);
      t.hits = 1;
      tracks_.push_back(t);
      events.spawned.insert({t.id, dj});
    }

    for (auto it = tracks_.begin(); it != tracks_.end();) {
      if (it->misses > options_.max_age) {
        events.ended.insert(it->id);
        it = tracks_.erase(it);
      } else {
        ++it;
      }
    }
    return events;
  }

  std::size_t live() const { return tracks_.size(); }

 private:
  struct Track {
    long id = 0;
    kalman_ref::State state;
    int hits = 0;
    int misses = 0;
  };

  struct Edge {
    int track;
    int det;
    double iou;
  };

  static void state_box(const kalman_ref::State& st, double& x, double& y, double& w,
                        double& h) {
    double s = st.x[2] > 1e-6 ? st.x[2] : 1e-6;
    double r = st.x[3] > 1e-6 ? st.x[3] : 1e-6;
    w = std::sqrt(s * r);
    h = s / w;
    x = st.x[0] - w / 2.0;
    y = st.x[1] - h / 2.0;
  }

  static double iou(double ax, double ay, double aw, double ah, double bx, double by, double bw,
                    double bh) {
    double ix = std::max(ax, bx), iy = std::max(ay, by);
    double ix2 = std::min(ax + aw, bx + bw), iy2 = std::min(ay + ah, by + bh);
    double iw = std::max(0.0, ix2 - ix), ih = std::max(0.0, iy2 - iy);
    double inter = iw * ih;
    double uni = aw * ah + bw * bh - inter;
    return uni <= 0 ? 0.0 : inter / uni;
  }

  static void search(const std::vector<Edge>& edges, std::size_t i, std::vector<int>& assign,
                     std::vector<bool>& det_used, double sum, double& best,
                     std::vector<int>& best_assign) {
    if (i == edges.size()) {
      if (sum > best) {
        best = sum;
        best_assign = assign;
      }
      return;
    }
    const Edge& e = edges[i];
    search(edges, i + 1, assign, det_used, sum, best, best_assign);
    if (assign[e.track] < 0 && !det_used[e.det]) {
      assign[e.track] = e.det;
      det_used[e.det] = true;
      search(edges, i + 1, assign, det_used, sum + e.iou, best, best_assign);
      assign[e.track] = -1;
      det_used[e.det] = false;
    }
  }

  Options options_;
  std::vector<Track> tracks_;
  long id_counter_ = 0;
};

}  // namespace sort_ref

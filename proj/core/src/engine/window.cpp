#include "ssf/engine/window.hpp"

#include <cmath>

namespace ssf::engine {

RuntimeWindow resolve_window(const ql::WindowSpec& spec, double tick_seconds) {
  RuntimeWindow w;
  if (spec.kind == ql::WindowSpec::Kind::Now) return w;
  w.kind = RuntimeWindow::Kind::Range;
  w.ticks = std::max<rdf::Tick>(1, std::llround(spec.seconds / tick_seconds));
  return w;
}

}  // namespace ssf::engine

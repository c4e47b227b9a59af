#pragma once

#include <string>
#include <vector>

#include "ssf/rdf/term.hpp"

namespace ssf::fed {

/// Line-delimited frames:
///   HELLO <node>
///   ADVERTISE <stream> <pred>,<pred>,...
///   SUB <id> <base64 subquery document>
///   FACT <id> <tick> <turtle-star line>
///   TICK <id> <tick>            -- tick complete for this subscription
///   UNSUB <id>
///   ERR <id> <reason>
struct Frame {
  enum class Kind { Hello, Advertise, Sub, Fact, Tick, Unsub, Err };
  Kind kind = Kind::Hello;
  std::string node;
  std::string stream;
  std::vector<std::string> predicates;
  long sub_id = 0;
  rdf::Tick tick = 0;
  std::string payload;  // Sub: base64 rules; Fact: serialized fact; Err: reason

  bool operator==(const Frame&) const = default;
};

std::string encode(const Frame& frame);
Frame decode(const std::string& line);

std::string base64_encode(const std::string& raw);
std::string base64_decode(const std::string& encoded);

}  // namespace ssf::fed

#include "ssf/fed/protocol.hpp"

#include <sstream>
#include <stdexcept>

namespace ssf::fed {

namespace {
constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(const std::string& raw) {
  std::string out;
  out.reserve((raw.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 2 < raw.size()) {
    unsigned v = (static_cast<unsigned char>(raw[i]) << 16) |
                 (static_cast<unsigned char>(raw[i + 1]) << 8) |
                 static_cast<unsigned char>(raw[i + 2]);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
    i += 3;
  }
  if (i + 1 == raw.size()) {
    unsigned v = static_cast<unsigned char>(raw[i]) << 16;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == raw.size()) {
    unsigned v = (static_cast<unsigned char>(raw[i]) << 16) |
                 (static_cast<unsigned char>(raw[i + 1]) << 8);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += "=";
  }
  return out;
}

std::string base64_decode(const std::string& encoded) {
  auto value_of = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::string out;
  unsigned buffer = 0;
  int bits = 0;
  for (char c : encoded) {
    if (c == '=') break;
    int v = value_of(c);
    if (v < 0) throw std::runtime_error("invalid base64");
    buffer = (buffer << 6) | static_cast<unsigned>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out += static_cast<char>((buffer >> bits) & 0xff);
    }
  }
  return out;
}

std::string encode(const Frame& frame) {
  std::ostringstream out;
  switch (frame.kind) {
    case Frame::Kind::Hello:
      out << "HELLO " << frame.node;
      break;
    case Frame::Kind::Advertise: {
      out << "ADVERTISE " << frame.stream << " ";
      for (std::size_t i = 0; i < frame.predicates.size(); ++i) {
        if (i) out << ",";
        out << frame.predicates[i];
      }
      break;
    }
    case Frame::Kind::Sub:
      out << "SUB " << frame.sub_id << " " << frame.payload;
      break;
    case Frame::Kind::Fact:
      out << "FACT " << frame.sub_id << " " << frame.tick << " " << frame.payload;
      break;
    case Frame::Kind::Tick:
      out << "TICK " << frame.sub_id << " " << frame.tick;
      break;
    case Frame::Kind::Unsub:
      out << "UNSUB " << frame.sub_id;
      break;
    case Frame::Kind::Err:
      out << "ERR " << frame.sub_id << " " << frame.payload;
      break;
  }
  return out.str();
}

Frame decode(const std::string& line) {
  std::istringstream in(line);
  std::string word;
  if (!(in >> word)) throw std::runtime_error("empty frame");
  Frame f;
  if (word == "HELLO") {
    f.kind = Frame::Kind::Hello;
    in >> f.node;
  } else if (word == "ADVERTISE") {
    f.kind = Frame::Kind::Advertise;
    in >> f.stream;
    std::string preds;
    in >> preds;
    std::string cur;
    for (char c : preds) {
      if (c == ',') {
        if (!cur.empty()) f.predicates.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) f.predicates.push_back(cur);
  } else if (word == "SUB") {
    f.kind = Frame::Kind::Sub;
    in >> f.sub_id >> f.payload;
  } else if (word == "FACT") {
    f.kind = Frame::Kind::Fact;
    in >> f.sub_id >> f.tick;
    std::getline(in, f.payload);
    if (!f.payload.empty() && f.payload.front() == ' ') f.payload.erase(0, 1);
  } else if (word == "TICK") {
    f.kind = Frame::Kind::Tick;
    in >> f.sub_id >> f.tick;
  } else if (word == "UNSUB") {
    f.kind = Frame::Kind::Unsub;
    in >> f.sub_id;
  } else if (word == "ERR") {
    f.kind = Frame::Kind::Err;
    in >> f.sub_id;
    std::getline(in, f.payload);
    if (!f.payload.empty() && f.payload.front() == ' ') f.payload.erase(0, 1);
  } else {
    throw std::runtime_error("unknown frame: " + word);
  }
  return f;
}

}  // namespace ssf::fed

#include "seqloc/diagnostics.hpp"

#include <iostream>
#include <map>
#include <mutex>
#include <string>

namespace seqloc {
namespace {

constexpr int kMaxRepeats = 5;

std::mutex& handler_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& current_handler() {
  static WarningHandler h;
  return h;
}

void default_handler(std::string_view message) {
  static std::map<std::string, int, std::less<>> seen;
  auto it = seen.find(message);
  if (it == seen.end()) it = seen.emplace(std::string(message), 0).first;
  const int count = ++it->second;
  if (count <= kMaxRepeats) {
    std::cerr << "warning: " << message << '\n';
  } else if (count == kMaxRepeats + 1) {
    std::cerr << "warning: (further repeats of the previous message suppressed)\n";
  }
}

}  // namespace

WarningHandler set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(handler_mutex());
  WarningHandler previous = std::move(current_handler());
  current_handler() = std::move(handler);
  return previous;
}

void warn(std::string_view message) {
  std::lock_guard lock(handler_mutex());
  if (current_handler()) {
    current_handler()(message);
  } else {
    default_handler(message);
  }
}

}  // namespace seqloc

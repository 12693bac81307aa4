#pragma once

#include <string>
#include <vector>

#include "schemabind/digest.hpp"
#include "schemabind/errors.hpp"
#include "schemabind/textio.hpp"

namespace schemabind {

constexpr const char* kToolVersion = "0.1.0";

// Ordered key=value record. Written to <out>/manifest.txt before any other
// artifact; feeding it back through --config reproduces the run.
struct RunManifest {
  std::vector<std::pair<std::string, std::string>> entries;

  void set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries)
      if (k == key) {
        v = value;
        return;
      }
    entries.emplace_back(key, value);
  }

  bool has(const std::string& key) const {
    for (const auto& [k, v] : entries)
      if (k == key) return true;
    return false;
  }

  std::string get(const std::string& key, const std::string& fallback = "") const {
    for (const auto& [k, v] : entries)
      if (k == key) return v;
    return fallback;
  }

  std::string to_text() const {
    std::string out;
    for (const auto& [k, v] : entries) out += k + "=" + v + "\n";
    return out;
  }

  static RunManifest from_text(const std::string& text) {
    RunManifest m;
    for (const auto& raw : split(text, '\n')) {
      auto line = std::string(trim(raw));
      if (line.empty() || line[0] == '#') continue;
      auto eq = line.find('=');
      if (eq == std::string::npos) throw DataError("config line without '=': " + line);
      m.entries.emplace_back(std::string(trim(line.substr(0, eq))),
                             std::string(trim(line.substr(eq + 1))));
    }
    return m;
  }

  static RunManifest read(const std::string& path) { return from_text(read_file(path)); }
  void write(const std::string& path) const { write_file(path, to_text()); }
};

}  // namespace schemabind

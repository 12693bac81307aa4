#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "schemabind/adam.hpp"
#include "schemabind/digest.hpp"
#include "schemabind/errors.hpp"
#include "schemabind/models.hpp"
#include "schemabind/textio.hpp"

namespace schemabind {

struct CheckpointMeta {
  std::string experiment;
  long step = 0;
  uint64_t seed = 0;
  std::string schema_hash;
};

namespace detail {

inline void hex_doubles(const std::vector<double>& xs, std::string& out) {
  static const char* hex = "0123456789abcdef";
  out.reserve(out.size() + xs.size() * 16);
  for (double x : xs) {
    uint64_t bits;
    std::memcpy(&bits, &x, 8);
    for (int b = 0; b < 8; ++b) {  // little-endian byte order
      unsigned byte = (bits >> (8 * b)) & 0xff;
      out.push_back(hex[byte >> 4]);
      out.push_back(hex[byte & 0xf]);
    }
  }
}

inline std::vector<double> unhex_doubles(std::string_view text) {
  if (text.size() % 16 != 0) throw DataError("checkpoint: truncated hex payload");
  auto nibble = [](char c) -> unsigned {
    if (c >= '0' && c <= '9') return static_cast<unsigned>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<unsigned>(c - 'a' + 10);
    throw DataError("checkpoint: bad hex digit");
  };
  std::vector<double> out(text.size() / 16);
  for (size_t i = 0; i < out.size(); ++i) {
    uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) {
      unsigned byte = (nibble(text[i * 16 + 2 * b]) << 4) | nibble(text[i * 16 + 2 * b + 1]);
      bits |= static_cast<uint64_t>(byte) << (8 * b);
    }
    double x;
    std::memcpy(&x, &bits, 8);
    out[i] = x;
  }
  return out;
}

}  // namespace detail

inline std::string checkpoint_text(const Model& model, const AdamState* adam,
                                   const CheckpointMeta& meta) {
  const auto& cfg = model.config();
  std::string out = "#schemabind-checkpoint v1\n";
  out += "#experiment=" + meta.experiment + " step=" + std::to_string(meta.step) +
         " seed=" + std::to_string(meta.seed) + " schema=" + meta.schema_hash + "\n";
  out += std::string("#arch=") + arch_name(cfg.arch) + " input=" + std::to_string(cfg.input_dim) +
         " hidden=" + std::to_string(cfg.hidden) + " output=" + std::to_string(cfg.output_dim) +
         " slots=" + std::to_string(cfg.ntm.slots) + " word=" + std::to_string(cfg.ntm.word) +
         " write_heads=" + std::to_string(cfg.ntm.write_heads) +
         " read_heads=" + std::to_string(cfg.ntm.read_heads) +
         " lambda=" + format_double(cfg.fw.lambda) + " eta=" + format_double(cfg.fw.eta) +
         " inner_steps=" + std::to_string(cfg.fw.inner_steps) + "\n";
  for (const auto& [name, t] : model.params().items) {
    out += name + "\t" + std::to_string(t.rows) + "\t" + std::to_string(t.cols) + "\t";
    detail::hex_doubles(t.data, out);
    out += "\n";
  }
  if (adam) {
    out += "#adam t=" + std::to_string(adam->t) + " lr=" + format_double(adam->lr) +
           " beta1=" + format_double(adam->beta1) + " beta2=" + format_double(adam->beta2) +
           " eps=" + format_double(adam->eps) + "\n";
    out += "m\t";
    detail::hex_doubles(adam->m, out);
    out += "\nv\t";
    detail::hex_doubles(adam->v, out);
    out += "\n";
  }
  out += "#sha256=" + sha256_hex(out) + "\n";
  return out;
}

inline void save_checkpoint(const std::string& path, const Model& model, const AdamState* adam,
                            const CheckpointMeta& meta) {
  write_file(path, checkpoint_text(model, adam, meta));
}

struct LoadedCheckpoint {
  CellConfig cfg;
  CheckpointMeta meta;
  std::vector<std::pair<std::string, Tensor>> tensors;
  AdamState adam;
  bool has_adam = false;
};

inline LoadedCheckpoint parse_checkpoint(const std::string& text,
                                         const std::string& expect_schema_hash = "") {
  auto tail = text.rfind("#sha256=");
  if (tail == std::string::npos || text.back() != '\n')
    throw DataError("checkpoint: missing checksum (truncated file?)");
  std::string body = text.substr(0, tail);
  std::string stated = text.substr(tail + 8, text.size() - tail - 9);
  if (sha256_hex(body) != stated) throw DataError("checkpoint: checksum mismatch, refusing to load");

  LoadedCheckpoint ck;
  auto lines = split(body, '\n');
  if (lines.size() < 3 || lines[0] != "#schemabind-checkpoint v1")
    throw DataError("checkpoint: bad magic line");
  {
    char exp[40] = {0}, schema[80] = {0};
    long step = 0;
    unsigned long long seed = 0;
    if (std::sscanf(lines[1].c_str(), "#experiment=%39s step=%ld seed=%llu schema=%79s", exp, &step,
                    &seed, schema) != 4)
      throw DataError("checkpoint: bad meta line");
    ck.meta = {exp, step, seed, schema};
  }
  {
    char arch[20] = {0};
    auto& c = ck.cfg;
    double lambda = 0, eta = 0;
    int inner = 0;
    if (std::sscanf(lines[2].c_str(),
                    "#arch=%19s input=%d hidden=%d output=%d slots=%d word=%d write_heads=%d "
                    "read_heads=%d lambda=%lf eta=%lf inner_steps=%d",
                    arch, &c.input_dim, &c.hidden, &c.output_dim, &c.ntm.slots, &c.ntm.word,
                    &c.ntm.write_heads, &c.ntm.read_heads, &lambda, &eta, &inner) != 11)
      throw DataError("checkpoint: bad config line");
    c.arch = arch_from_name(arch);
    c.fw.lambda = lambda;
    c.fw.eta = eta;
    c.fw.inner_steps = inner;
  }
  if (!expect_schema_hash.empty() && ck.meta.schema_hash != expect_schema_hash)
    throw DataError("checkpoint was trained against schema " + ck.meta.schema_hash +
                    ", refusing to use it with schema " + expect_schema_hash);

  for (size_t li = 3; li < lines.size(); ++li) {
    const auto& line = lines[li];
    if (line.empty()) continue;
    if (line.rfind("#adam ", 0) == 0) {
      long t = 0;
      if (std::sscanf(line.c_str(), "#adam t=%ld lr=%lf beta1=%lf beta2=%lf eps=%lf", &t,
                      &ck.adam.lr, &ck.adam.beta1, &ck.adam.beta2, &ck.adam.eps) != 5)
        throw DataError("checkpoint: bad adam line");
      ck.adam.t = t;
      ck.has_adam = true;
      continue;
    }
    auto parts = split(line, '\t');
    if (ck.has_adam && parts.size() == 2) {
      auto values = detail::unhex_doubles(parts[1]);
      if (parts[0] == "m") ck.adam.m = std::move(values);
      else if (parts[0] == "v") ck.adam.v = std::move(values);
      else throw DataError("checkpoint: unexpected adam row " + parts[0]);
      continue;
    }
    if (parts.size() != 4) throw DataError("checkpoint: malformed row " + std::to_string(li + 1));
    Tensor t(std::stoi(parts[1]), std::stoi(parts[2]));
    t.data = detail::unhex_doubles(parts[3]);
    if (static_cast<int>(t.data.size()) != t.rows * t.cols)
      throw DataError("checkpoint: payload size mismatch for " + parts[0]);
    ck.tensors.emplace_back(parts[0], std::move(t));
  }
  return ck;
}

inline LoadedCheckpoint load_checkpoint(const std::string& path,
                                        const std::string& expect_schema_hash = "") {
  return parse_checkpoint(read_file(path), expect_schema_hash);
}

inline Model model_from_checkpoint(const LoadedCheckpoint& ck) {
  Model model(ck.cfg, /*seed=*/0);
  auto& items = model.params().items;
  if (items.size() != ck.tensors.size())
    throw DataError("checkpoint: parameter count mismatch");
  for (size_t i = 0; i < items.size(); ++i) {
    if (items[i].first != ck.tensors[i].first ||
        !items[i].second.same_shape(ck.tensors[i].second))
      throw DataError("checkpoint: parameter " + ck.tensors[i].first + " does not match model");
    items[i].second = ck.tensors[i].second;
  }
  return model;
}

}  // namespace schemabind

#include "npde/checkpoint.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace npde {

namespace {

void write_values(std::ostream& out, std::span<const double> values) {
  char buf[32];
  for (double v : values) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    out << buf;
  }
}

void read_values(std::istream& in, std::span<double> values,
                 const std::string& path) {
  std::string token;
  for (double& v : values) {
    if (!(in >> token)) {
      throw std::runtime_error("checkpoint " + path + " is truncated");
    }
    v = std::stod(token);
  }
}

}  // namespace

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  const auto& cfg = ckpt.params.config();
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write checkpoint " + tmp);
    out << "npde-checkpoint 1 input_dim=" << cfg.input_dim
        << " width=" << cfg.width << " blocks=" << cfg.blocks
        << " activation=" << to_string(cfg.activation)
        << " adaptive=" << (cfg.adaptive ? 1 : 0)
        << " trial=" << to_string(ckpt.trial) << " epoch=" << ckpt.epoch
        << "\n";
    out << "params " << ckpt.params.size() << "\n";
    write_values(out, ckpt.params.flat());
    if (ckpt.adam) {
      out << "adam " << ckpt.adam->step << " " << ckpt.adam->m.size() << "\n";
      write_values(out, ckpt.adam->m);
      write_values(out, ckpt.adam->v);
    }
    if (!out) throw std::runtime_error("failed writing checkpoint " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  std::string header;
  std::getline(in, header);
  std::istringstream fields(header);
  std::string magic;
  int version = 0;
  fields >> magic >> version;
  if (magic != "npde-checkpoint" || version != 1) {
    throw std::runtime_error(path + " is not an npde checkpoint");
  }
  std::map<std::string, std::string> kv;
  for (std::string field; fields >> field;) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("bad checkpoint header field " + field);
    }
    kv[field.substr(0, eq)] = field.substr(eq + 1);
  }
  auto need = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) {
      throw std::runtime_error("checkpoint header lacks " + key);
    }
    return it->second;
  };

  NetworkConfig cfg;
  cfg.input_dim = std::stoi(need("input_dim"));
  cfg.width = std::stoi(need("width"));
  cfg.blocks = std::stoi(need("blocks"));
  cfg.activation = parse_activation(need("activation"));
  cfg.adaptive = need("adaptive") == "1";

  Checkpoint ckpt;
  ckpt.params = ResNetParams(cfg);
  ckpt.trial = parse_trial(need("trial"));
  ckpt.epoch = std::stoll(need("epoch"));

  std::string section;
  std::size_t count = 0;
  in >> section >> count;
  if (section != "params" || count != ckpt.params.size()) {
    throw std::runtime_error("checkpoint parameter count does not match header");
  }
  read_values(in, ckpt.params.flat(), path);

  if (in >> section) {
    if (section != "adam") {
      throw std::runtime_error("unexpected checkpoint section " + section);
    }
    std::int64_t step = 0;
    in >> step >> count;
    if (count != ckpt.params.size()) {
      throw std::runtime_error("checkpoint adam state size mismatch");
    }
    AdamState state(count);
    state.step = step;
    read_values(in, state.m, path);
    read_values(in, state.v, path);
    ckpt.adam = std::move(state);
  }
  return ckpt;
}

}  // namespace npde

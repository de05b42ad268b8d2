#include "nbmoe/parameters.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nbmoe/errors.hpp"

namespace nbmoe::num {

std::size_t ParameterSet::add(std::string name, Tensor value) {
  if (index_.contains(name)) throw ConfigError("duplicate parameter name: " + name);
  index_.emplace(name, values_.size());
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
  return values_.size() - 1;
}

bool ParameterSet::contains(std::string_view name) const {
  return index_.contains(std::string(name));
}

std::size_t ParameterSet::index_of(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw ConfigError("unknown parameter: " + std::string(name));
  return it->second;
}

Tensor& ParameterSet::at(std::string_view name) { return values_[index_of(name)]; }
const Tensor& ParameterSet::at(std::string_view name) const { return values_[index_of(name)]; }

std::size_t ParameterSet::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const auto& t : values_) n += t.size();
  return n;
}

std::string ParameterSet::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t i = 0; i < values_.size(); ++i) {
    j[names_[i]] = {{"rows", values_[i].rows()},
                    {"cols", values_[i].cols()},
                    {"data", values_[i].values()}};
  }
  return j.dump();
}

void ParameterSet::load_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw DataError("checkpoint must be a JSON object");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    auto it = j.find(names_[i]);
    if (it == j.end()) throw DataError("checkpoint missing parameter " + names_[i]);
    const auto rows = it->at("rows").get<std::size_t>();
    const auto cols = it->at("cols").get<std::size_t>();
    if (rows != values_[i].rows() || cols != values_[i].cols()) {
      throw DataError("checkpoint shape mismatch for " + names_[i]);
    }
    Tensor loaded(rows, cols, it->at("data").get<std::vector<double>>());
    ensure_finite(loaded, names_[i]);
    values_[i] = std::move(loaded);
  }
}

void ParameterSet::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out << to_json() << '\n';
}

void ParameterSet::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read checkpoint " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  load_json(buf.str());
}

BoundParameters::BoundParameters(Tape& tape, const ParameterSet& params)
    : tape_(&tape), params_(&params) {
  vars_.reserve(params.size());
  for (const auto& v : params.values()) vars_.push_back(tape.parameter(v));
}

Var BoundParameters::operator[](std::string_view name) const {
  return vars_[params_->index_of(name)];
}

std::vector<Tensor> BoundParameters::gradients() const {
  std::vector<Tensor> out;
  out.reserve(vars_.size());
  for (const auto& v : vars_) out.push_back(tape_->grad(v));
  return out;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform01(std::uint64_t& rng_state) {
  return static_cast<double>(splitmix64(rng_state) >> 11) * 0x1.0p-53;
}

Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, std::uint64_t& rng_state) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor w(fan_in, fan_out);
  for (double& v : w.data()) v = (2.0 * uniform01(rng_state) - 1.0) * limit;
  return w;
}

}  // namespace nbmoe::num

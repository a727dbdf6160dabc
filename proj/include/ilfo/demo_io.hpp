#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "ilfo/types.hpp"

namespace ilfo {

// Demo files are JSON: {"horizon": T, "obs_dim": d, "trajectories": [[[..]..]..]}.
// nlohmann serializes doubles with shortest round-trip precision, so
// save -> load reproduces every observation bit-exactly.

inline nlohmann::json demo_set_to_json(const DemoSet& demos) {
  demos.validate();
  nlohmann::json j;
  j["horizon"] = demos.horizon;
  j["obs_dim"] = demos.obs_dim;
  auto trajs = nlohmann::json::array();
  for (const auto& tau : demos.trajectories) {
    auto steps = nlohmann::json::array();
    for (const auto& o : tau.observations) {
      auto vec = nlohmann::json::array();
      for (int i = 0; i < o.size(); ++i) vec.push_back(o[i]);
      steps.push_back(std::move(vec));
    }
    trajs.push_back(std::move(steps));
  }
  j["trajectories"] = std::move(trajs);
  return j;
}

inline DemoSet demo_set_from_json(const nlohmann::json& j) {
  DemoSet demos;
  demos.horizon = j.at("horizon").get<int>();
  demos.obs_dim = j.at("obs_dim").get<int>();
  for (const auto& steps : j.at("trajectories")) {
    Trajectory tau;
    for (const auto& vec : steps) {
      Observation o(vec.size());
      for (std::size_t i = 0; i < vec.size(); ++i) o[static_cast<int>(i)] = vec[i].get<double>();
      tau.observations.push_back(std::move(o));
    }
    demos.trajectories.push_back(std::move(tau));
  }
  demos.validate();
  return demos;
}

inline void save_demo_set(const DemoSet& demos, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open demo file for writing: " + path);
  out << demo_set_to_json(demos).dump(1) << "\n";
}

inline DemoSet load_demo_set(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open demo file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("demo file " + path + ": " + e.what());
  }
  return demo_set_from_json(j);
}

}  // namespace ilfo

#include "cmdp/serialize.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "cmdp/errors.hpp"

namespace cmdp {

std::string format_real(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

namespace {

using nlohmann::json;

template <typename T>
void append_array(std::string& out, std::span<const T> values) {
  out += '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>)
      out += format_real(values[i]);
    else
      out += std::to_string(values[i]);
  }
  out += ']';
}

template <typename T>
void append_array(std::string& out, const std::vector<T>& values) {
  append_array(out, std::span<const T>(values));
}

void append_kernel(std::string& out, const TransitionKernel& kernel) {
  out += '[';
  for (int s = 0; s < kernel.num_states(); ++s) {
    if (s) out += ',';
    out += '[';
    for (int a = 0; a < kernel.num_actions(); ++a) {
      if (a) out += ',';
      append_array(out, kernel.row(s, a));
    }
    out += ']';
  }
  out += ']';
}

json parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidParameter(std::string("malformed JSON: ") + e.what());
  }
}

template <typename T>
std::vector<T> take_vector(const json& node, const char* key) {
  if (!node.contains(key)) throw InvalidParameter(std::string("missing field '") + key + "'");
  return node.at(key).get<std::vector<T>>();
}

Trajectory trajectory_from_node(const json& node) {
  Trajectory t;
  t.states = take_vector<int>(node, "states");
  t.actions = take_vector<int>(node, "actions");
  t.rewards = take_vector<double>(node, "rewards");
  if (node.contains("true_context") && !node.at("true_context").is_null())
    t.true_context = node.at("true_context").get<int>();
  detail::require(t.states.size() == t.actions.size() + 1 && t.rewards.size() == t.states.size(),
                  "trajectory arrays violate the length contract");
  return t;
}

}  // namespace

std::string to_json(const ContextualMdp& cmdp) {
  std::string out = "{\n";
  out += "  \"num_states\": " + std::to_string(cmdp.num_states()) + ",\n";
  out += "  \"num_actions\": " + std::to_string(cmdp.num_actions()) + ",\n";
  out += "  \"num_contexts\": " + std::to_string(cmdp.num_contexts()) + ",\n";
  out += "  \"rewards\": ";
  append_array(out, cmdp.rewards());
  out += ",\n  \"initial_dist\": ";
  append_array(out, cmdp.initial_dist());
  out += ",\n  \"context_dist\": ";
  append_array(out, cmdp.context_dist);
  out += ",\n  \"kernels\": [\n";
  for (int c = 0; c < cmdp.num_contexts(); ++c) {
    out += "    ";
    append_kernel(out, cmdp.contexts[c].kernel);
    out += c + 1 < cmdp.num_contexts() ? ",\n" : "\n";
  }
  out += "  ]\n}\n";
  return out;
}

std::string to_json(const Trajectory& trajectory) {
  std::string out = "{\"horizon\": " + std::to_string(trajectory.horizon()) + ", \"true_context\": ";
  out += trajectory.true_context ? std::to_string(*trajectory.true_context) : "null";
  out += ", \"states\": ";
  append_array(out, trajectory.states);
  out += ", \"actions\": ";
  append_array(out, trajectory.actions);
  out += ", \"rewards\": ";
  append_array(out, trajectory.rewards);
  out += '}';
  return out;
}

std::string to_json(std::span<const Trajectory> trajectories) {
  std::string out = "{\"trajectories\": [\n";
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    out += "  " + to_json(trajectories[i]);
    out += i + 1 < trajectories.size() ? ",\n" : "\n";
  }
  out += "]}\n";
  return out;
}

ContextualMdp cmdp_from_json(std::string_view text) {
  const json root = parse(text);
  const int num_states = root.at("num_states").get<int>();
  const int num_actions = root.at("num_actions").get<int>();
  const int num_contexts = root.at("num_contexts").get<int>();
  const auto rewards = take_vector<double>(root, "rewards");
  const auto initial = take_vector<double>(root, "initial_dist");

  ContextualMdp cmdp;
  cmdp.context_dist = take_vector<double>(root, "context_dist");
  const json& kernels = root.at("kernels");
  detail::require(kernels.is_array() && static_cast<int>(kernels.size()) == num_contexts,
                  "kernel list does not match num_contexts");
  for (const json& k : kernels) {
    std::vector<double> probs;
    probs.reserve(static_cast<std::size_t>(num_states) * num_actions * num_states);
    detail::require(static_cast<int>(k.size()) == num_states, "kernel state dimension mismatch");
    for (const json& by_action : k) {
      detail::require(static_cast<int>(by_action.size()) == num_actions, "kernel action dimension mismatch");
      for (const json& row : by_action) {
        detail::require(static_cast<int>(row.size()) == num_states, "kernel row length mismatch");
        for (const json& p : row) probs.push_back(p.get<double>());
      }
    }
    cmdp.contexts.push_back(Mdp{TransitionKernel(num_states, num_actions, std::move(probs)), rewards, initial});
  }
  cmdp.validate();
  return cmdp;
}

Trajectory trajectory_from_json(std::string_view text) { return trajectory_from_node(parse(text)); }

std::vector<Trajectory> trajectories_from_json(std::string_view text) {
  const json root = parse(text);
  detail::require(root.contains("trajectories") && root.at("trajectories").is_array(),
                  "expected a 'trajectories' array");
  std::vector<Trajectory> out;
  for (const json& node : root.at("trajectories")) out.push_back(trajectory_from_node(node));
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, std::string_view contents) {
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  std::error_code ignored;
  if (!parent.empty()) std::filesystem::create_directories(parent, ignored);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace cmdp

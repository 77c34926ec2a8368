#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cmdp/mdp.hpp"

namespace cmdp {

/// Fixed 17-significant-digit rendering; round-trips exactly through strtod.
std::string format_real(double value);

// JSON text with kernels nested in (context, s, a, s') order. Output is a
// pure function of the value, so equal inputs give identical bytes.
std::string to_json(const ContextualMdp& cmdp);
std::string to_json(const Trajectory& trajectory);
std::string to_json(std::span<const Trajectory> trajectories);

ContextualMdp cmdp_from_json(std::string_view text);
Trajectory trajectory_from_json(std::string_view text);
std::vector<Trajectory> trajectories_from_json(std::string_view text);

std::string read_text_file(const std::string& path);
/// Throws IoError naming the path when the file cannot be written.
void write_text_file(const std::string& path, std::string_view contents);

}  // namespace cmdp

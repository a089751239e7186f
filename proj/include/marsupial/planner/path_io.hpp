#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "marsupial/planner/tether.hpp"

namespace marsupial::planner {

/// JSON array of {t_index, p_g:[x,y,z], p_a:[x,y,z], tether_len}.
std::string path_to_json(const std::vector<JointState>& states);
void save_path_json(const std::vector<JointState>& states, const std::filesystem::path& path);
/// CSV `t_index,xg,yg,zg,xa,ya,za,tether_len`.
void save_path_csv(const std::vector<JointState>& states, const std::filesystem::path& path);

/// Reads the JSON written by save_path_json. Throws IoError, ParseError
/// (malformed or non-finite values) or EmptyInputError (no states).
std::vector<JointState> load_path_json(const std::filesystem::path& path);

}  // namespace marsupial::planner

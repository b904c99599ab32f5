#pragma once

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hpcfd/trace.hpp"

namespace testutil {

/// Scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("hpcfd_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }

  std::string file(const std::string& name) const { return (path / name).string(); }
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

#ifdef HPCFD_CLI_PATH
/// Runs the CLI binary; returns the process exit code.
inline int run_cli(const std::string& args, const std::string& stdin_path = "",
                   const std::string& stdout_path = "/dev/null",
                   const std::string& stderr_path = "/dev/null") {
  std::string command = std::string(HPCFD_CLI_PATH) + " " + args;
  if (!stdin_path.empty()) command += " < " + stdin_path;
  command += " > " + stdout_path + " 2> " + stderr_path;
  const int status = std::system(command.c_str());
  return WEXITSTATUS(status);
}
#endif

/// Builds a trace starting at `start` from (name, column) pairs; names are
/// sorted internally. Core metrics carry one column per core id.
inline hpcfd::Trace make_trace(
    std::vector<std::pair<std::string, std::vector<double>>> node,
    std::vector<int> core_ids = {},
    std::vector<std::pair<std::string, std::vector<std::vector<double>>>> core = {},
    std::int64_t start = 0) {
  std::sort(node.begin(), node.end());
  std::sort(core.begin(), core.end());
  std::size_t length = 0;
  if (!node.empty()) length = node[0].second.size();
  if (!core.empty()) length = core[0].second.at(0).size();

  std::vector<std::string> node_names;
  std::vector<std::vector<double>> node_columns;
  for (auto& [name, column] : node) {
    node_names.push_back(name);
    node_columns.push_back(std::move(column));
  }
  std::vector<std::string> core_names;
  std::vector<std::vector<std::vector<double>>> core_columns(core_ids.size());
  for (auto& [name, per_core] : core) {
    core_names.push_back(name);
    for (std::size_t c = 0; c < core_ids.size(); ++c) {
      core_columns[c].push_back(std::move(per_core.at(c)));
    }
  }
  return hpcfd::Trace::build(start, length, std::move(node_names), std::move(node_columns),
                             std::move(core_ids), std::move(core_names),
                             std::move(core_columns));
}

}  // namespace testutil

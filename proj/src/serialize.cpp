#include "accel/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "accel/generators.hpp"

namespace accel {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t problem_hash(const CompositeProblem& problem) {
  if (problem.meta.is_null()) throw contract_error("problem carries no serializable meta block");
  return fnv1a(problem.meta.dump());
}

void atomic_write_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw contract_error("cannot open for writing: " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw contract_error("short write: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw contract_error("cannot move into place: " + path);
}

void save_problem(const CompositeProblem& problem, const std::string& path) {
  if (problem.meta.is_null()) throw contract_error("problem carries no serializable meta block");
  atomic_write_file(path, problem.meta.dump() + "\n");
}

CompositeProblem load_problem(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw contract_error("cannot open problem file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  json meta = json::parse(buf.str());
  return problem_from_meta(meta);
}

}  // namespace accel

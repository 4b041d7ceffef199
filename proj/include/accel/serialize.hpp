#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "accel/problem.hpp"

namespace accel {

std::uint64_t fnv1a(std::string_view s);

// Hash of the canonical serialized form; traces carry it so comparisons can
// refuse to mix runs from different instances.
std::uint64_t problem_hash(const CompositeProblem& problem);

// Write-then-rename so concurrent readers never observe a partial file.
void atomic_write_file(const std::string& path, const std::string& content);

void save_problem(const CompositeProblem& problem, const std::string& path);
CompositeProblem load_problem(const std::string& path);

}  // namespace accel

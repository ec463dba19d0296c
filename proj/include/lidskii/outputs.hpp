#pragma once

#include <string>
#include <vector>

#include "lidskii/types.hpp"

namespace lidskii {

// 17-significant-digit decimal formatting used by every CSV cell.
std::string format_g17(double v);

// Write atomically: temp file in the same directory, then rename.
void atomic_write_text(const std::string& path, const std::string& content);

void ensure_directory(const std::string& path);

// CSV with header t,method,component,re,im; one row per time x method x component.
std::string solution_csv(const std::vector<double>& times,
                         const std::vector<SolutionResult>& results);

}  // namespace lidskii

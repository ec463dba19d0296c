#include "lidskii/outputs.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "lidskii/errors.hpp"

namespace lidskii {

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void atomic_write_text(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail_input("io-failure", "cannot write to '" + tmp + "'");
    out << content;
    out.flush();
    if (!out) fail_input("io-failure", "short write to '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail_input("io-failure", "cannot rename '" + tmp + "' to '" + path + "'");
}

void ensure_directory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) fail_input("io-failure", "cannot create directory '" + path + "'");
}

std::string solution_csv(const std::vector<double>& times,
                         const std::vector<SolutionResult>& results) {
  std::string out = "t,method,component,re,im\n";
  for (std::size_t it = 0; it < times.size(); ++it) {
    for (const auto& r : results) {
      const Vec& u = r.states.at(it);
      for (int i = 0; i < u.size(); ++i) {
        out += format_g17(times[it]);
        out += ',';
        out += r.method;
        out += ',';
        out += std::to_string(i);
        out += ',';
        out += format_g17(u(i).real());
        out += ',';
        out += format_g17(u(i).imag());
        out += '\n';
      }
    }
  }
  return out;
}

}  // namespace lidskii

#include <cstdio>

#include "fbms/verify.hpp"

int main() {
  int failed = 0;
  const auto results = fbms::verify::run_all([](const fbms::verify::CriterionResult& r) {
    std::printf("%s\n", fbms::verify::summary_line(r).c_str());
    for (const auto& note : r.notes) std::printf("      %s\n", note.c_str());
    std::fflush(stdout);
  });
  for (const auto& r : results) failed += !r.passed();
  std::printf("%d/%d criteria passed\n", fbms::verify::kCriterionCount - failed,
              fbms::verify::kCriterionCount);
  return failed ? 1 : 0;
}

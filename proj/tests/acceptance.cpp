// Acceptance survey driver: runs every numbered criterion, prints one
// PASS/FAIL line per criterion with its measured quantities, and exits
// nonzero if any criterion fails. Intended both for ctest and for eyeballing.

#include <scg/report.hpp>

#include <cstdio>
#include <string>

int main()
{
    int failures = 0;
    const auto results = scg::run_acceptance([&failures](const scg::criterion_result &r) {
        std::string values;
        for (const auto &m : r.metrics) {
            char buf[96];
            std::snprintf(buf, sizeof buf, " %s=%.6g", m.name.c_str(), m.value);
            values += buf;
        }
        if (!r.passed) {
            ++failures;
            if (!r.note.empty()) {
                values += "  [";
                values += r.note;
                values += "]";
            }
        }
        std::printf("[%2d] %s  %-26s %6.2fs %s\n", r.number, r.passed ? "PASS" : "FAIL",
                    r.name.c_str(), r.seconds, values.c_str());
        std::fflush(stdout);
    });

    std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failures,
                results.size());
    return failures == 0 ? 0 : 1;
}

// Example 3 at n = 60 with 200 replicates: the baseline error levels of the
// two-step calibrators. Prints one line per check and exits non-zero on failure.

#include "sgcal/experiments.hpp"

#include <cmath>
#include <cstdio>

int main() {
    sgcal::Example3Config c;
    c.n = 60;
    c.replicates = 200;
    c.seed = 60;
    const sgcal::ExperimentResult r = sgcal::run_example3(c);
    std::printf("%s\n", sgcal::summary_table(r).c_str());

    bool ok = true;
    const auto check = [&](bool cond, const char* what, double value) {
        std::printf("%s %s: %.4f\n", cond ? "PASS" : "FAIL", what, value);
        ok = ok && cond;
    };
    const double l2_model = r.find("l2").avg_rmse_model;
    const double ls_model = r.find("ls").avg_rmse_model;
    const double ls_pred = r.find("ls").avg_rmse_pred;
    check(std::abs(l2_model - 0.126) <= 0.01, "L2 AvgRMSE_fM within 0.01 of 0.126", l2_model);
    check(std::abs(ls_model - 0.126) <= 0.01, "LS AvgRMSE_fM within 0.01 of 0.126", ls_model);
    check(std::abs(ls_pred - 0.039) <= 0.005, "LS AvgRMSE_pred within 0.005 of 0.039", ls_pred);
    return ok ? 0 : 1;
}

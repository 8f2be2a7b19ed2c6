// Trains TD3 and CCEP on the pendulum for a few thousand steps and prints
// the evaluation curve of each.

#include "ccep/harness.hpp"

#include <iostream>

int main() {
    ccep::RunConfig cfg;
    cfg.env = "pendulum";
    cfg.agent.hidden_sizes = {64, 64};
    cfg.agent.batch_size = 64;
    cfg.agent.warmup_steps = 1000;
    cfg.agent.total_steps = 10000;
    cfg.eval_interval = 2500;
    cfg.output_dir = "sample_runs";

    for (auto algo : {ccep::Algorithm::td3, ccep::Algorithm::ccep}) {
        cfg.agent.algorithm = algo;
        const auto result = ccep::run(cfg);
        std::cout << ccep::to_string(algo) << ":\n";
        for (const auto& row : result.rows)
            std::cout << "  step " << row.step << "  return " << row.return_mean << "  controversy " << row.controversy
                      << "\n";
    }
}

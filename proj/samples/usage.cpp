// Minimal library use: load a CSV, run ABE0 and LT under leave-one-out,
// print both metric suites and the Wilcoxon p-value between them.

#include <iostream>
#include <string>

#include "abe/abe.hpp"

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : "data/synthetic/telecom_like.csv";
  const std::string effort = argc > 2 ? argv[2] : "effort";
  try {
    const abe::Dataset raw = abe::load_dataset(path, abe::Schema{effort, {}, {}});
    const abe::StandardizedDataset ds = abe::standardize(abe::preprocess(raw));
    const auto baseline = abe::random_guess_baseline(ds.efforts());

    abe::mopso::MopsoConfig cfg;
    cfg.pop_size = 30;
    cfg.max_iter = 30;
    cfg.seed = 7;

    const auto abe0 = abe::run_loocv(ds, "ABE0", cfg);
    const auto lt = abe::run_loocv(ds, "LT", cfg);
    for (const auto* run : {&abe0, &lt}) {
      const auto s = abe::evaluate(run->predictions, baseline);
      std::cout << run->method << ": MAE " << s.mae << ", SA " << 100 * s.sa << "%, MBRE " << s.mbre << ", MIBRE "
                << s.mibre << '\n';
    }
    const auto ea = abe::absolute_errors(abe0.predictions);
    const auto eb = abe::absolute_errors(lt.predictions);
    std::cout << "Wilcoxon p = " << abe::wilcoxon_rank_sum(ea, eb) << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

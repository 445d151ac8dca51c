#pragma once

namespace siglab_cli {

// Runs the named oracle checks and prints one line per check. Returns
// true iff every check passed. perturb_bias_grad nudges the analytic
// bias gradient before comparison, a hook proving the checks can fail.
bool run_verify(bool perturb_bias_grad);

}  // namespace siglab_cli

//
// Copyright 2026 The dpce Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Runs one private Frank-Wolfe trial and one spectral trial on the desk
// profile and prints the channel NMSE and symbol error rate of each.

#include <cstdio>

#include "dpce/harness.hpp"

int main() {
  using namespace dpce;
  const Scenario sc = Scenario::desk();
  const RMatrix beta = draw_large_scale(sc, 7);
  const WorkingUnits w = to_working_units(sc, beta, Units::normalized);

  MethodParams mp;
  mp.eps = 1.0;
  mp.delta = 0.1;
  mp.crossval = false;

  for (Method m : {Method::fw, Method::svd, Method::npfw, Method::po}) {
    const ResolvedParams p = resolve_params(m, w, mp, 7);
    const TrialOutcome o = run_trial(m, w.scenario, w.beta, p, 7, 0);
    std::printf("%-5s nmse=%.4f ser=%.4f noise_scale=%.3g audit=%s\n", to_string(m), o.nmse,
                o.ser, o.noise_scale, o.audit_pass ? "pass" : "fail");
  }
  return 0;
}

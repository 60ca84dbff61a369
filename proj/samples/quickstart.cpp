// Copyright 2026 The hamtest Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Tests two 3-qubit Hamiltonians against a small Pauli-support property
// through the black-box oracle.

#include <iostream>

#include "hamtest/testers.hpp"

int main() {
  using namespace hamtest;
  const int n = 3;
  MubFamily family = build_mub_family(n);
  PropertySet z_type = property_from_text("ZII\nIIZ\nZIZ", n);

  PauliHamiltonian inside(n);
  inside.set(PauliString::parse("ZII"), 0.5);
  inside.set(PauliString::parse("ZIZ"), -0.4);

  PauliHamiltonian far(n);
  far.set(PauliString::parse("XXY"), 0.7);
  far.set(PauliString::parse("ZII"), 0.2);

  for (const auto& [name, h] : {std::pair{"inside", inside}, std::pair{"far", far}}) {
    EvolutionOracle oracle(hamiltonian_to_dense(h));
    TestConfig cfg;
    cfg.eps = 0.6;
    cfg.seed = 11;
    cfg.keep_rounds = false;
    TestReport rep = run_single_test(oracle, family, z_type, cfg);
    std::cout << name << ": distance " << distance_to_property(h, z_type) << ", verdict "
              << verdict_name(rep.verdict) << ", " << rep.violations << " violations in " << rep.queries_used
              << " queries, total time " << rep.total_evolution_time << "\n";
    for (const auto& f : rep.flags) {
      std::cout << "  " << f.name << ": " << f.lhs << " vs " << f.rhs << (f.holds ? " holds" : " fails") << "\n";
    }
  }
}

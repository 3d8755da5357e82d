#include "hamla/scenario.hpp"

namespace hamla {

const std::vector<GalleryEntry>& gallery() {
  static const std::vector<GalleryEntry> entries = {
      {"so3_liepoisson", "Lie-Poisson so(3)*, cotangent algebroid, trivial connection, mu = -x",
       R"toml(name = "so3_liepoisson"
description = "Lie-Poisson structure on so(3)*. The cotangent algebroid with the flat connection and mu = -x is hamiltonian."
jet_order = 2

[chart]
coordinates = ["x1", "x2", "x3"]

[poisson]
matrix = [["0", "x3", "-x2"], ["-x3", "0", "x1"], ["x2", "-x1", "0"]]

[algebroid]
kind = "cotangent"

[connection]
kind = "trivial"

[momentum]
components = ["-x1", "-x2", "-x3"]

[sampling]
lo = -1.0
hi = 1.0
count = 25
seed = 42

[coisotropy]
point = [0.0, 0.0, 0.0]

[checks]
run = ["poisson", "algebroid", "H1", "H2", "H3", "pointwise", "invariance", "coisotropy",
       "classify_connection", "theorem41", "bivector_map", "pi_A_brackets", "pi_hat_brackets"]

[expect]
poisson = true
algebroid = true
H1 = true
H2 = true
H3 = true
pointwise = true
invariance = true
coisotropy = true
classify_connection = true
theorem41 = true
bivector_map = true
pi_A_brackets = true
pi_hat_brackets = true
)toml"},
      {"so3_coadjoint_action", "so(3) acting on so(3)* by the coadjoint action, mu = x",
       R"toml(name = "so3_coadjoint_action"
description = "Action algebroid of the coadjoint so(3) action on so(3)*. Generators are the hamiltonian fields of the coordinates; mu = x."

[chart]
coordinates = ["x1", "x2", "x3"]

[poisson]
upper = ["x3", "-x2", "x1"]

[algebroid]
kind = "action"
lie_algebra = "so3"
generators = [["0", "x3", "-x2"], ["-x3", "0", "x1"], ["x2", "-x1", "0"]]

[momentum]
components = ["x1", "x2", "x3"]

[coisotropy]
point = [0.0, 0.0, 0.0]

[checks]
run = ["algebroid", "H1", "H2", "H3", "pointwise", "invariance", "coisotropy", "theorem41", "bivector_map",
       "pi_A_brackets", "pi_hat_brackets"]
)toml"},
      {"zeromu", "constant rank-2 Poisson structure on R^3 with mu = (-x, -y, 0)",
       R"toml(name = "zeromu"
description = "Pi = d_x ^ d_y on R^3 with the cotangent algebroid and mu = (-x, -y, 0). H1 and H2 hold but H3 fails by 1, and mu is not Liouville."

[chart]
coordinates = ["x", "y", "z"]

[poisson]
upper = ["1", "0", "0"]

[algebroid]
kind = "cotangent"

[momentum]
components = ["-x", "-y", "0"]

[coisotropy]
point = [0.0, 0.0, 1.0]

[checks]
run = ["H1", "H2", "H3", "liouville", "pointwise", "invariance", "coisotropy", "theorem41", "bivector_map",
       "classify_connection"]

[expect]
H1 = true
H2 = true
H3 = { pass = false, max_residual = 1.0, within = 1e-9 }
liouville = { pass = false, max_residual = 1.0, within = 1e-9 }
pointwise = true
invariance = false
coisotropy = true
theorem41 = true
bivector_map = false
classify_connection = true
)toml"},
      {"zeromu_shifted", "zeromu with mu shifted by -1 in the z direction",
       R"toml(name = "zeromu_shifted"
description = "As zeromu with mu = (-x, -y, -1). A constant shift keeps H2 and does not repair H3."

[chart]
coordinates = ["x", "y", "z"]

[poisson]
upper = ["1", "0", "0"]

[algebroid]
kind = "cotangent"

[momentum]
components = ["-x", "-y", "-1"]

[checks]
run = ["H1", "H2", "H3", "pointwise"]

[expect]
H1 = true
H2 = true
H3 = { pass = false, max_residual = 1.0, within = 1e-9 }
pointwise = true
)toml"},
      {"darboux_local", "Darboux chart with a Liouville one-form and the momentum connection",
       R"toml(name = "darboux_local"
description = "Pi = d_q ^ d_p near q = 0. eta = (q + 1) dp gives the Liouville field mu = Pi# eta; the flat connection fails H2 and the momentum connection repairs it."

[chart]
coordinates = ["q", "p"]

[poisson]
upper = ["1"]

[algebroid]
kind = "cotangent"

[momentum]
components = ["-(q + 1)", "0"]

[eta]
components = ["0", "q + 1"]

[sampling]
box = [[-0.5, 0.5], [-1.0, 1.0]]
count = 25

[checks]
run = ["liouville", "H1", "H2", "momentum_connection"]

[expect]
liouville = { pass = true, metrics = { eta_residual = 0.0, verdict_agreement = 1.0 } }
H1 = true
H2 = false
momentum_connection = true
)toml"},
      {"lie_algebra_bundle_so3", "trivial so(3) bundle over a symplectic plane with an adjoint connection",
       R"toml(name = "lie_algebra_bundle_so3"
description = "Trivial so(3) bundle over (R^2, d_x ^ d_y) with D_x = ad e1, D_y = ad e2 and mu = 0."

[chart]
coordinates = ["x", "y"]

[poisson]
upper = ["1"]

[algebroid]
kind = "lie_algebra_bundle"
lie_algebra = "so3"

[connection]
kind = "table"
entries = [
  { i = "x", g = 3, b = 2, value = "1" },
  { i = "x", g = 2, b = 3, value = "-1" },
  { i = "y", g = 3, b = 1, value = "-1" },
  { i = "y", g = 1, b = 3, value = "1" },
]

[momentum]
components = ["0", "0", "0"]

[checks]
run = ["algebroid", "H1", "H2", "H3", "pointwise", "invariance", "theorem41", "bivector_map", "pi_A_brackets",
       "pi_hat_brackets"]
)toml"},
      {"r4_nonpoisson", "bivector on R^4 that fails the Jacobi identity",
       R"toml(name = "r4_nonpoisson"
description = "Pi = d1 ^ d2 + x1 d3 ^ d4 on R^4. [Pi, Pi] has the single component -2 in the (2,3,4) slot."

[chart]
coordinates = ["x1", "x2", "x3", "x4"]

[poisson]
upper = ["1", "0", "0", "0", "0", "x1"]

[checks]
run = ["poisson"]

[expect]
poisson = { pass = false, max_residual = 2.0, within = 1e-9, metrics = { schouten_234 = -2.0 } }
)toml"},
      {"x_dx_action", "the vector field x d_x acting on the symplectic plane",
       R"toml(name = "x_dx_action"
description = "Abelian rank-1 action of x d_x on (R^2, d_x ^ d_y). The action is not Poisson, so H1 fails with residual 1."

[chart]
coordinates = ["x", "y"]

[poisson]
upper = ["1"]

[algebroid]
kind = "action"
lie_algebra = "abelian"
generators = [["x", "0"]]

[momentum]
components = ["0"]

[sampling]
box = [[1.0, 2.0], [-1.0, 1.0]]

[checks]
run = ["algebroid", "H1", "theorem41", "pointwise"]

[expect]
algebroid = true
H1 = { pass = false, max_residual = 1.0, within = 1e-9 }
theorem41 = { pass = false, metrics = { verdict_agreement = 1.0 } }
pointwise = true
)toml"},
      {"symplectic_suite_r2", "tangent algebroid of the symplectic plane with the Euler field",
       R"toml(name = "symplectic_suite_r2"
description = "Tangent algebroid of (R^2, d_q ^ d_p), flat connection, n = -(q d_q + p d_p), mu = i_n omega. The presentations agree; H3 fails in each."

[chart]
coordinates = ["q", "p"]

[poisson]
upper = ["1"]

[algebroid]
kind = "tangent"

[momentum]
components = ["-p", "q"]

[symplectic]
n = ["-q", "-p"]

[checks]
run = ["H1", "H2", "H3", "H1_pre", "H2_pre", "H3_pre", "symplectic_suite", "classify_connection"]

[expect]
H1 = true
H2 = true
H3 = false
H1_pre = true
H2_pre = true
H3_pre = false
symplectic_suite = true
classify_connection = true
)toml"},
      {"momentum_connection_r3", "momentum connection for eta = dy on a degenerate R^3",
       R"toml(name = "momentum_connection_r3"
description = "Pi = d_x ^ d_y on R^3 with eta = dy and mu = Pi# eta = -d_x. The flat connection fails H2; the momentum connection satisfies H1 and H2."

[chart]
coordinates = ["x", "y", "z"]

[poisson]
upper = ["1", "0", "0"]

[algebroid]
kind = "cotangent"

[momentum]
components = ["-1", "0", "0"]

[eta]
components = ["0", "1", "0"]

[checks]
run = ["H1", "H2", "momentum_connection"]

[expect]
H1 = true
H2 = false
momentum_connection = true
)toml"},
  };
  return entries;
}

}  // namespace hamla

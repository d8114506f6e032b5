#pragma once

namespace ergolab {

// Closed-form solution of dY = (aY - bY^3) dt. The substitution u = Y^-2
// turns the drift into the linear equation u' = -2a u + 2b, so
// Y(t) = sign(x) [b/a + (x^-2 - b/a) e^{-2at}]^{-1/2}. The equilibria 0
// and +-sqrt(a/b) are returned bitwise unchanged.
double exact_cubic_flow(double x, double t, double a, double b);

// Time for the flow started at x to reach y. Requires x, y in the same
// basin with y between x and the equilibrium (the approach is monotone).
double cubic_flow_hit_time(double x, double y, double a, double b);

// Smallest T such that |flow(x,T) - z| < eps for every x in [x_lo, x_hi],
// where z is the equilibrium of the (single) basin containing the
// interval. Monotonicity in the initial condition reduces the interval to
// its endpoints. Returned with a +1% safety margin.
double flow_entry_time(double x_lo, double x_hi, double z, double eps, double a, double b);

// Largest window w such that the flow image of [lo, hi] stays inside
// (target_lo, target_hi) for all s <= w. Infinity when no endpoint ever
// exits. No margin is applied here; callers shrink as needed.
double flow_stay_window(double lo, double hi, double target_lo, double target_hi,
                        double a, double b);

}  // namespace ergolab

"""Channel aging in pictures (well, in numbers).

CSI is measured only at pilot instants. Between pilots the receiver holds a
stale estimate, and the staleness follows a sawtooth in time. This script
prints the sawtooth, contrasts the two acquisition scenarios, and rebuilds
the NMSE-vs-velocity table that motivates everything else here.
"""

import numpy as np

import fadelink as fl

MS = 1e-3

# The sawtooth: elapsed time since the latest pilot, with a 4 ms period.
print("aging delay tau_ag(t) with a 4 ms pilot period:")
for t_ms in (0.0, 1.0, 3.9, 4.0, 5.0, 8.0, 9.5):
    tau = fl.tau_ag(t_ms * MS, 4 * MS)
    print(f"  t = {t_ms:4.1f} ms -> tau = {tau / MS:4.2f} ms")

# Two acquisition scenarios over the same channel: perfect prediction
# (estimates equal the truth) versus pilot-frozen estimates.
config = fl.ChannelConfig(carrier_hz=2.4e9, velocity_mps=15.0, seed=21)
real = fl.realize_channel(fl.synthesize_paths(config), config, duration_s=1.0)

for scenario in (fl.Scenario.WITH_CP, fl.Scenario.AGING):
    sched = fl.AgingSchedule(4 * MS, scenario, real)
    est = fl.csi_estimate(sched, real.times)
    print(f"\nscenario {scenario.value}: NMSE over the trajectory = "
          f"{fl.csi_nmse(est, real.samples):.4f}")
    if scenario is fl.Scenario.AGING:
        distinct = np.unique(est).size
        print(f"  estimates are piecewise constant: {distinct} distinct values "
              f"across {est.size} samples (one per pilot)")

# Causal views: the transmitter sees estimates up to the send instant, the
# receiver up to the end of the transmission window.
sched = fl.AgingSchedule(4 * MS, fl.Scenario.AGING, real)
tx = fl.side_info(sched, 6.0, 0.5, 0.502, fl.Side.TX)
rx = fl.side_info(sched, 6.0, 0.5, 0.502, fl.Side.RX)
print(f"\ncausal views at t_beg = 0.5 s: Tx sees {tx.csi_view.size} samples, "
      f"Rx sees {rx.csi_view.size}")

# The headline table: how fast does the frozen estimate degrade with speed?
print("\nmean aging NMSE over 20 scenes per velocity "
      "(f_c = 2.4 GHz, T_p = 4 ms):")
for velocity in (2.0, 6.0, 10.0, 15.0, 21.0):
    values = []
    for trial in range(20):
        cfg = fl.ChannelConfig(carrier_hz=2.4e9, velocity_mps=velocity,
                               seed=4000 + trial)
        r = fl.realize_channel(fl.synthesize_paths(cfg), cfg, 2.0)
        s = fl.AgingSchedule(4 * MS, fl.Scenario.AGING, r)
        values.append(fl.csi_nmse(fl.csi_estimate(s, r.times), r.samples))
    print(f"  v = {velocity:4.0f} m/s   NMSE = {np.mean(values):.3f}")
print("(the same table is available from the CLI: fadelink nmse-table)")

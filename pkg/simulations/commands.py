import logging

import numpy as np

from simulations import lattice, metrics, multiphoton, photonics, spectral, wavepacket
from simulations.lattice import PolState, QPlate, StepSequence, WavePlate
from util import export, util
from util.errors import ConfigError, NormalizationError, NotPlanarError, ParameterError, ZeroCountError


def _element(doc):
    if doc["type"] == "waveplate":
        return WavePlate(doc["retardance"], doc.get("axis_angle", 0.0))
    return QPlate(doc.get("charge", 0.5), doc.get("delta", np.pi), doc.get("alpha0", 0.0))


def step_sequence(doc):
    if doc.get("elements"):
        return StepSequence([_element(e) for e in doc["elements"]], "custom")
    return StepSequence.preset(doc.get("preset", "standard-paper"), delta=doc.get("delta", np.pi),
                               alpha0=doc.get("alpha0", 0.0), charge=doc.get("charge", 0.5))


def _coin(value):
    if value is None:
        return None
    try:
        return PolState.from_any(value).check_normalized()
    except (ParameterError, NormalizationError) as e:
        raise ConfigError(str(e), field="coin") from e


def _pairs(dist):
    return [[m, p] for m, p in dist.items()]


def _sampled(config, dist, name):
    sampling = config.get("sampling") or {}
    if not sampling.get("shots"):
        return None, None
    record = metrics.sample_counts(dist, sampling["shots"], sampling.get("seed", 0))
    path = export.write_csv(f"{name}_counts", ["m", "count"], sorted(record.counts.items()), config)
    return record, path


def cmd_walk(config):
    seq = step_sequence(config["step"])
    n, m0 = config["steps"], config.get("m0", 0)
    if config.get("window"):
        window = tuple(config["window"])
    else:
        lo, hi = lattice.default_window(n, seq)
        window = (m0 + lo, m0 + hi)
    state = lattice.make_localized_state(m0, _coin(config["coin"]), window)
    d_over_zR = config.get("d_over_zR", 0.0)
    if d_over_zR:
        states = photonics.gouy_walk(state, seq, n, d_over_zR)
    else:
        states = lattice.evolve(state, seq, n)
    marginals = [lattice.oam_marginal(s) for s in states]
    final = marginals[-1]
    name = config["name"]

    paths = [export.write_csv(name, ["step", "m", "P"],
                              ([j, m, p] for j, dist in enumerate(marginals) for m, p in dist.items()), config)]
    summary = {
        "steps": [{"step": j, "distribution": _pairs(dist), "mean": wavepacket.mean_oam(dist),
                   "variance": wavepacket.variance(dist)} for j, dist in enumerate(marginals)],
        "norm_drift": abs(states[-1].norm - 1.0),
        "odd_parity_weight": lattice.odd_parity_weight(final, n, m0),
        "entanglement": lattice.coin_walker_entanglement(states[-1]),
    }

    efficiency = config.get("efficiency")
    detected = final
    if efficiency:
        detected = metrics.ProbDist({m: p * efficiency.get(str(m), 1.0) for m, p in final.items()},
                                    subnormalized=True).normalized()
    record, path = _sampled(config, detected, name)
    if record:
        paths.append(path)
        frequencies = record.frequencies()
        if efficiency:
            frequencies = photonics.efficiency_correction(
                frequencies, lambda m: efficiency.get(str(m), 1.0))
        summary["sampling"] = {"shots": record.shots, "seed": record.seed, "bit_generator": record.bit_generator,
                               "similarity": metrics.similarity(frequencies, final),
                               "tvd": metrics.tvd(frequencies, final)}
    paths.append(export.write_json(name, summary, config))
    logging.info(f"{n}-step walk finished, final spread {wavepacket.variance(final):.4f}")
    return paths


def cmd_bands(config):
    seq = step_sequence(config["step"])
    mirror = config.get("mirror", False)
    count = config["k_points"]
    ks = np.linspace(-np.pi, np.pi, count + 1)[1:]
    bands = spectral.dispersion(seq, ks, mirror=mirror)
    v1, v2 = spectral.group_velocity(seq, ks, mirror=mirror)
    stokes = bands.stokes[0]
    rows = ([k, w1, w2, a, b, *s] for k, w1, w2, a, b, s in zip(ks, *bands.omega, v1, v2, stokes))
    name = config["name"]
    paths = [export.write_csv(name, ["k", "omega1", "omega2", "V1", "V2", "s1x", "s1y", "s1z"], rows, config)]

    try:
        winding = spectral.winding_number(seq, mirror=mirror)
    except NotPlanarError as e:
        logging.warning(f"no winding number for {seq.name}: {e}")
        winding = None
    summary = {
        "band_gap": bands.band_gap(),
        "eigenvalue_residual": bands.eigenvalue_residual(seq),
        "winding": winding,
        "closed_form": spectral.matches_closed_form(seq),
        "max_speed": float(max(np.max(np.abs(v1)), np.max(np.abs(v2)))),
    }
    paths.append(export.write_json(name, summary, config))
    logging.info(f"band structure on {count} k-points, gap {summary['band_gap']:.4f}")
    return paths


def _wavepacket_spec(config):
    return wavepacket.WavepacketSpec(config["sigma"], config["k0"], config.get("band", 1),
                                     coin_override=_coin(config.get("coin")))


def _sweep_points(config):
    lo, hi = config.get("k0_range") or (-np.pi, np.pi)
    if not lo < hi:
        raise ConfigError(f"empty range ({lo}, {hi}]", field="k0_range")
    return np.linspace(lo, hi, config["k0_points"] + 1)[1:]


def cmd_wavepacket(config):
    seq = step_sequence(config["step"])
    n, mode, name = config["steps"], config["mode"], config["name"]
    mirror = config.get("mirror", False)

    if mode == "sweep":
        k0s = _sweep_points(config)
        sweep = wavepacket.brillouin_sweep(config["sigma"], config.get("band", 1), k0s, n, seq,
                                           workers=util.options["workers"], mirror=mirror)
        paths = [export.write_csv(name, ["k0", "mean_oam", "variance"], sweep, config)]
        summary = {"max_mean": max(abs(p.mean_oam) for p in sweep)}
    elif mode == "cat":
        split = wavepacket.cat_split(config["sigma"], config["k0"], n, seq)
        paths = [export.write_csv(name, ["m", "P"], split.marginal.items(), config)]
        summary = {"separation": split.separation, "peaks": split.peaks, "entropy": split.entropy,
                   "lower_mass": split.lower_mass, "upper_mass": split.upper_mass}
    else:
        spec = _wavepacket_spec(config)
        marginals = wavepacket.propagate(spec, seq, n, mirror=mirror)
        paths = [export.write_csv(name, ["step", "m", "P"],
                                  ([j, m, p] for j, dist in enumerate(marginals) for m, p in dist.items()), config)]
        start = wavepacket.make_wavepacket(spec, seq)
        summary = {
            "mean": [wavepacket.mean_oam(d) for d in marginals],
            "variance": [wavepacket.variance(d) for d in marginals],
            "predicted_drift": wavepacket.predicted_drift(spec, seq, n, mirror=mirror),
            "quasi_momentum": wavepacket.mean_quasi_momentum(start, seq.spacing),
        }
    paths.append(export.write_json(name, summary, config))
    logging.info(f"wavepacket {mode} finished")
    return paths


def _joint(unitary, inputs, model, indistinguishability):
    if model == "DPT":
        return multiphoton.dpt_joint(unitary, *inputs)
    if indistinguishability < 1:
        return multiphoton.partial_distinguishability(unitary, *inputs, indistinguishability)
    return multiphoton.ipt_joint(unitary, *inputs)


def _significance_rows(config, joint, scan, name):
    sampling = config.get("sampling") or {}
    if not sampling.get("shots"):
        return None, None
    record = metrics.sample_counts(joint.coincidences().normalized(), sampling["shots"], sampling.get("seed", 0))
    rows = []
    for pair in scan:
        try:
            result = multiphoton.violation_significance(record, config["inequality"], pairs=[pair])[pair]
        except ZeroCountError:
            logging.warning(f"pair {pair[0]}, {pair[1]} has no counts, skipped")
            continue
        rows.append([pair[0].pol, pair[0].m, pair[1].pol, pair[1].m, *result])
    path = export.write_csv(f"{name}_significance",
                            ["pol1", "m1", "pol2", "m2", "T", "sigma", "significance"], rows, config)
    return path, max((r[-1] for r in rows), default=None)


def cmd_twophoton(config):
    seq = step_sequence(config["step"])
    n, name = config["steps"], config["name"]
    inputs = [multiphoton.ModeIndex.from_any(m) for m in config["inputs"]]
    window = (min(m.m for m in inputs), max(m.m for m in inputs))
    unitary = multiphoton.lift_walk_unitary(seq, n, window, basis=config.get("basis", "LR"))

    joints = {model: _joint(unitary, inputs, model, config.get("indistinguishability", 1.0))
              for model in config["models"]}
    reference = joints.get("DPT")
    paths, summary = [], {}
    for model, joint in joints.items():
        label = f"{name}_{model.lower()}"
        paths.append(export.write_csv(label, ["pol1", "m1", "pol2", "m2", "P"], joint.rows(), config))
        scan = multiphoton.inequality_scan(joint, config["inequality"], reference=reference)
        top = max(scan.items(), key=lambda item: item[1], default=None)
        summary[model] = {
            "mode_coincidence": joint.mode_coincidence(),
            "bunched": joint.bunched,
            "violations": sum(1 for t in scan.values() if t > 0),
            "max_T": None if top is None else {"pair": [str(top[0][0]), str(top[0][1])], "T": top[1]},
        }
        path, best = _significance_rows(config, joint, scan, label)
        if path:
            paths.append(path)
            summary[model]["max_significance"] = best
    if "IPT" in joints and "DPT" in joints:
        ipt, dpt = joints["IPT"].coincidences(), joints["DPT"].coincidences()
        summary["tvd"] = metrics.tvd(ipt, dpt)
        summary["similarity"] = metrics.similarity(ipt, dpt)
    paths.append(export.write_json(name, summary, config))
    logging.info(f"two-photon walk over {n} steps finished for {', '.join(joints)}")
    return paths


def cmd_hologram(config):
    grid = photonics.HologramGrid(**config["grid"])
    target, w0, name = config["target"], config["w0"], config["name"]
    if target["kind"] == "oam":
        amplitude, phase = photonics.oam_field(target["m"], grid, w0)
    else:
        seq = step_sequence(target.get("step", {"preset": "wavepacket"}))
        state = wavepacket.make_wavepacket(_wavepacket_spec(target), seq)
        amplitude, phase = photonics.wavepacket_field(state, grid, w0)
    hologram = photonics.make_hologram(amplitude, phase, grid, carrier=config.get("carrier", 0.0))

    summary = {"grid": config["grid"], "carrier": hologram.carrier,
               "phase_range": [float(hologram.phase.min()), float(hologram.phase.max())]}
    if target["kind"] == "oam":
        radius = w0 * np.sqrt(max(abs(target["m"]), 1) / 2)
        summary["dislocation_order"] = photonics.dislocation_order(hologram, radius)
    paths = [export.write_graymap(name, hologram.graylevels()),
             export.write_csv(name, ["i", "j", "phase"], hologram.rows(), config)]
    summary["files"] = [p.name for p in paths]
    paths.append(export.write_json(name, summary, config))
    logging.info(f"hologram {grid.width}x{grid.height} written")
    return paths


def cmd_radial(config):
    name = config["name"]
    expansions = [photonics.qplate_radial_coefficients(m, config["p_max"]) for m in config["m_values"]]
    paths = [export.write_csv(name, ["m", "p", "abs_c_sq"],
                              ([e.m_in, p, power] for e in expansions for p, power in e.rows()), config)]
    summary = {"residual": {str(e.m_in): e.residual for e in expansions}}

    pupil = config.get("pupil")
    if pupil:
        rows = [[m, zeta, photonics.pupil_overlap(m, zeta)] for m in pupil["m"] for zeta in pupil["zeta"]]
        paths.append(export.write_csv(f"{name}_pupil", ["m", "zeta", "overlap"], rows, config))
        summary["pupil"] = rows
    paths.append(export.write_json(name, summary, config))
    logging.info(f"radial coefficients for m in {config['m_values']} written")
    return paths

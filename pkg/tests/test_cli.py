import json

import numpy as np
import pytest

from timbrespace.cli import main
from timbrespace.dataset import SynthSpec, synth_sample, write_wav


@pytest.fixture(scope="module")
def wav_library(tmp_path_factory):
    root = tmp_path_factory.mktemp("wavs")
    rng = np.random.default_rng(0)
    for k in range(18):
        spec = SynthSpec(fundamental=float(120 + 90 * k), n_harmonics=3,
                         harmonic_rolloff=float(rng.uniform(0, 2)),
                         attack=0.01, duration=0.5, seed=k)
        write_wav(root / f"guitar_acoustic_{k:03d}-064-100.wav",
                  synth_sample(spec, 16_000))
    return root


def run(args):
    assert main(args) == 0


def test_scan_features_embed_place_labels_pipeline(wav_library, tmp_path):
    manifest = tmp_path / "manifest.json"
    features = tmp_path / "features.json"
    embedding = tmp_path / "embedding.json"
    placed = tmp_path / "placed.json"

    run(["scan", str(wav_library), "--pitch", "64", "--rate", "16000",
         "--out", str(manifest)])
    data = json.loads(manifest.read_text())
    assert len(data["samples"]) == 18
    assert all(s["meta"]["pitch"] == 64 for s in data["samples"])

    run(["features", str(manifest), "--out", str(features)])
    feats = json.loads(features.read_text())
    assert len(feats["samples"]) == 18
    assert len(feats["samples"][0]["spectral_envelope"]) == 42
    assert "centroid" in feats["samples"][0]

    run(["embed", str(features), "--neighbors", "5", "--epochs", "60",
         "--pca-dim", "4", "--seed", "3", "--out", str(embedding)])
    emb = json.loads(embedding.read_text())
    assert len(emb["ids"]) == 18
    assert len(emb["coords"]) == 18

    run(["place", str(embedding), "--mode", "dr", "--canvas", "800x800",
         "--out", str(placed)])
    placed_data = json.loads(placed.read_text())
    pos = np.asarray(placed_data["positions"])
    d = np.linalg.norm(pos[:, None] - pos[None, :], axis=2)
    np.fill_diagonal(d, np.inf)
    assert d.min() >= 64.0

    for mode, artifact in [("shape", "shapes.json"), ("color-v1", "colors.json"),
                           ("color-v2", "colors.json")]:
        out_dir = tmp_path / f"assets-{mode}"
        run(["labels", str(placed), str(features), "--mode", mode,
             "--out", str(out_dir)])
        assert (out_dir / artifact).exists()

    texture_dir = tmp_path / "assets-texture"
    run(["labels", str(placed), str(features), "--mode", "texture",
         "--texture-size", "64", "--out", str(texture_dir)])
    weights = json.loads((texture_dir / "weights.json").read_text())
    assert len(weights["medoids"]) == 8
    assert (texture_dir / f"{data['samples'][0]['id']}.png").exists()


def test_stats_cli_reports(tmp_path):
    import sys

    sys.path.insert(0, str((__import__("pathlib").Path(__file__).parent)))
    from test_stats import fake_records

    results = tmp_path / "results.jsonl"
    lines = [json.dumps(r) for r in fake_records(seed=1)]
    results.write_text("\n".join(lines) + "\n")

    summary_out = tmp_path / "summary.json"
    run(["stats", str(results), "--report", "summary", "--seed", "0",
         "--out", str(summary_out)])
    payload = json.loads(summary_out.read_text())
    assert len(payload["rows"]) == 12

    sig_out = tmp_path / "sig.json"
    run(["stats", str(results), "--report", "significance", "--out", str(sig_out)])
    payload = json.loads(sig_out.read_text())
    assert payload["measures"]


def test_export_cli(tmp_path):
    from timbrespace.store import ResultStore

    store = ResultStore(tmp_path / "data")
    store.results.append({"task_id": "t0", "participant_id": "p0", "attempt": 0,
                          "distance": 1.0})
    out = tmp_path / "dump.jsonl"
    run(["export", "--data", str(tmp_path / "data"), "--out", str(out)])
    assert json.loads(out.read_text().strip())["task_id"] == "t0"

import dataclasses

import numpy as np
import pytest
from PIL import Image

from lipvessel import cli, fileio
from lipvessel.segmentation import PipelineParams
from lipvessel.synthetic import fundus_phantom


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("drive")
    for i in (1, 2):
        ph = fundus_phantom(96, seed=i)
        Image.fromarray(ph.rgb).save(root / f"{i:02d}_test.png")
        fileio.write_mask_png(root / f"{i:02d}_test_mask.png", ph.fov)
        fileio.write_mask_png(root / f"{i:02d}_manual1.png", ph.vessels)
    cfg = root / "drive.cfg"
    cfg.write_text(
        f"images = {root}/*_test.png\n"
        f"fov = {root}/*_test_mask.png\n"
        f"references = {root}/*_manual1.png\n"
        "fov-angle = 45\n"
    )
    return root, cfg


def test_defaults_snapshot():
    assert dataclasses.asdict(PipelineParams()) == {
        "area_fraction": 0.12,
        "change_limit": 0.40,
        "max_probes": 3,
        "orientation_count": 18,
        "discard_fraction": 0.20,
        "fov_angle": 45.0,
        "fov_threshold": 20.0,
        "probe_polarity": "center-high",
        "adapt_intensity": True,
        "center_reference": 215.0,
        "side_reference": 225.0,
    }
    args = cli.build_parser().parse_args(["segment", "x.png"])
    assert cli.params_from(args, {}) == PipelineParams()


def test_flags_override_config():
    args = cli.build_parser().parse_args(["segment", "x.png", "--orientations", "4"])
    p = cli.params_from(args, {"orientations": "8", "max-probes": "2"})
    assert p.orientation_count == 4 and p.max_probes == 2


def test_segment_writes_outputs(dataset, tmp_path, capsys):
    root, _ = dataset
    out = tmp_path / "out"
    status = cli.main(["segment", str(root / "01_test.png"), "--fov", str(root / "01_test_mask.png"),
                       "--reference", str(root / "01_manual1.png"), "--out", str(out), "--save-maps"])
    assert status == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == sorted([
        "01_test_vessels.png", "01_test_overlay.png",
        "01_test_vesselness.pfm", "01_test_vesselness.png", "01_test_vesselness.png.txt",
        "01_test_phi.pfm", "01_test_phi.png", "01_test_phi.png.txt",
    ])
    assert "I=" in capsys.readouterr().out
    phi = fileio.read_pfm(out / "01_test_phi.pfm")
    assert np.nanmax(phi) == 1.0


def test_segment_degraded_run_stays_in_fov(dataset, tmp_path):
    root, _ = dataset
    status = cli.main(["segment", str(root / "02_test.png"), "--orientations", "4",
                       "--max-probes", "1", "--out", str(tmp_path)])
    assert status == 0
    mask = fileio.read_mask(tmp_path / "02_test_vessels.png")
    fov = fileio.read_mask(root / "02_test_mask.png")
    assert mask.any() and not (mask & ~fov).any()


def test_segment_missing_file(tmp_path):
    status = cli.main(["segment", str(tmp_path / "nope.png"), "--out", str(tmp_path / "o")])
    assert status == cli.EXIT_IO
    assert not (tmp_path / "o").exists()


def test_usage_errors(tmp_path):
    with pytest.raises(SystemExit) as exc:
        cli.main(["segment"])
    assert exc.value.code == cli.EXIT_USAGE
    assert cli.main(["segment", "x.png", "--area-fraction", "1.5"]) == cli.EXIT_USAGE


def test_pipeline_failure_status(tmp_path):
    Image.fromarray(np.zeros((32, 32, 3), np.uint8)).save(tmp_path / "black.png")
    assert cli.main(["segment", str(tmp_path / "black.png"), "--out", str(tmp_path)]) == cli.EXIT_PIPELINE


def test_batch_then_eval(dataset, tmp_path, capsys):
    root, cfg = dataset
    out = tmp_path / "pred"
    assert cli.main(["batch", str(cfg), "--out", str(out)]) == 0
    first = {p.name: p.read_bytes() for p in out.iterdir()}
    assert sorted(first) == ["01_test_overlay.png", "01_test_vessels.png",
                             "02_test_overlay.png", "02_test_vessels.png"]

    again = tmp_path / "pred2"
    assert cli.main(["batch", str(cfg), "--out", str(again), "--jobs", "2"]) == 0
    assert {p.name: p.read_bytes() for p in again.iterdir()} == first

    capsys.readouterr()
    assert cli.main(["eval", str(out), str(cfg)]) == 0
    line = capsys.readouterr().out
    assert line.startswith("Se ") and "Acc" in line
    rows = (out / "metrics.csv").read_text().splitlines()
    assert rows[0] == "image_id,tp,tn,fp,fn,se,sp,acc" and rows[-2].startswith("mean,")


def test_eval_references_against_themselves(dataset, tmp_path, capsys):
    root, cfg = dataset
    for i in (1, 2):
        ref = fileio.read_mask(root / f"{i:02d}_manual1.png")
        fileio.write_mask_png(tmp_path / f"{i:02d}_test_vessels.png", ref)
    assert cli.main(["eval", str(tmp_path), str(cfg)]) == 0
    assert "Acc 1.0000 (0.0000)" in capsys.readouterr().out


def test_eval_golden_csv(tmp_path):
    ref1 = np.zeros((4, 4), bool)
    ref1[1, :] = True
    pred1 = ref1.copy()
    pred1[1, 3] = False
    pred1[3, 0] = True
    ref2 = np.zeros((4, 4), bool)
    ref2[2, 1:3] = True
    fov2 = np.ones((4, 4), bool)
    fov2[0] = False
    pred2 = ref2.copy()
    pred2[0, 0] = True  # outside the FOV, not counted
    for key, pred, ref, fov in (("01", pred1, ref1, np.ones((4, 4), bool)), ("02", pred2, ref2, fov2)):
        fileio.write_mask_png(tmp_path / f"{key}_test_vessels.png", pred)
        fileio.write_mask_png(tmp_path / f"{key}_manual1.png", ref)
        fileio.write_mask_png(tmp_path / f"{key}_mask.png", fov)
    cfg = tmp_path / "c.cfg"
    cfg.write_text(f"images = {tmp_path}/*_test.png\nfov = {tmp_path}/*_mask.png\n"
                   f"references = {tmp_path}/*_manual1.png\n")
    assert cli.main(["eval", str(tmp_path), str(cfg), "--out", str(tmp_path / "g.csv")]) == 0
    assert (tmp_path / "g.csv").read_text() == (
        "image_id,tp,tn,fp,fn,se,sp,acc\n"
        "01,3,11,1,1,0.750000,0.916667,0.875000\n"
        "02,2,10,0,0,1.000000,1.000000,1.000000\n"
        "mean,5,21,1,1,0.875000,0.958333,0.937500\n"
        "std,,,,,,,0.088388\n"
    )


def test_eval_missing_reference(dataset, tmp_path, capsys):
    _, cfg = dataset
    fileio.write_mask_png(tmp_path / "07_test_vessels.png", np.zeros((4, 4), bool))
    assert cli.main(["eval", str(tmp_path), str(cfg)]) == cli.EXIT_IO
    assert "07_test_vessels" in capsys.readouterr().err


def test_batch_empty_glob(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(f"images = {tmp_path}/*.nothing\n")
    assert cli.main(["batch", str(cfg)]) == cli.EXIT_IO

"""Unit tests for dataset records and the JSONL store."""

import json

import numpy as np
import pytest

from intermodal_mtl.core.config import Modality
from intermodal_mtl.core.errors import DatasetDimensionError, DatasetError
from intermodal_mtl.persistence.dataset_store import dumps_dataset, load_dataset, save_dataset
from intermodal_mtl.persistence.models import Dataset, Split, Utterance
from tests.fixtures.sample_videos import (
    header_line,
    make_dataset,
    make_video,
    no_emotion_only,
    utterance_record,
    video_line,
    write_lines,
)


class TestLoadDataset:
    """Parsing and validation with error locations."""

    def test_valid_file(self, tmp_path):
        path = write_lines(tmp_path / "ok.jsonl", [
            header_line(),
            video_line("v1", [utterance_record("v1_a"), utterance_record("v1_b", sentiment=0)]),
            video_line("v2", [utterance_record("v2_a", emotions=no_emotion_only())]),
        ])
        dataset = load_dataset(path, Split.DEV)
        assert len(dataset) == 2
        assert dataset.num_utterances == 3
        assert dataset.dims == (4, 3, 2)
        assert dataset.split is Split.DEV
        assert dataset.get("v1").sentiment_labels().tolist() == [1, 0]
        assert dataset.get("missing") is None

    def test_features_matrix(self, tmp_path):
        path = write_lines(tmp_path / "ok.jsonl", [
            header_line(),
            video_line("v1", [utterance_record("a"), utterance_record("b")]),
        ])
        video = load_dataset(path).get("v1")
        assert video.features(Modality.ACOUSTIC).shape == (2, 3)
        assert video.emotion_labels().shape == (2, 7)

    def test_blank_lines_skipped(self, tmp_path):
        path = write_lines(tmp_path / "ok.jsonl", [
            header_line(), "", video_line("v1", [utterance_record("a")]), "",
        ])
        assert len(load_dataset(path)) == 1

    def test_missing_file(self, tmp_path):
        with pytest.raises(DatasetError, match="not found"):
            load_dataset(tmp_path / "absent.jsonl")

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("", encoding="utf-8")
        with pytest.raises(DatasetError, match="header"):
            load_dataset(path)

    def test_wrong_format_tag(self, tmp_path):
        path = write_lines(tmp_path / "bad.jsonl", [json.dumps({'format': 'other/2', 'dims': [4, 3, 2]})])
        with pytest.raises(DatasetError) as exc:
            load_dataset(path)
        assert exc.value.locus == "line 1"

    @pytest.mark.parametrize("dims", [[4, 3], [4, 0, 2], [4, 3.5, 2], "432"])
    def test_bad_header_dims(self, tmp_path, dims):
        path = write_lines(tmp_path / "bad.jsonl", [json.dumps({'format': 'mtmm-es/1', 'dims': dims})])
        with pytest.raises(DatasetError, match="dims"):
            load_dataset(path)

    def test_invalid_json_names_line(self, tmp_path):
        path = write_lines(tmp_path / "bad.jsonl", [
            header_line(), video_line("v1", [utterance_record("a")]), '{"video_id": "v2", ',
        ])
        with pytest.raises(DatasetError) as exc:
            load_dataset(path)
        assert exc.value.locus == "line 3"

    def test_dimension_mismatch_names_utterance(self, tmp_path):
        path = write_lines(tmp_path / "bad.jsonl", [
            header_line(),
            video_line("v1", [utterance_record("good"), utterance_record("short", visual=[0.1])]),
        ])
        with pytest.raises(DatasetDimensionError) as exc:
            load_dataset(path)
        assert exc.value.locus == "utterance short"
        assert "visual" in str(exc.value)

    @pytest.mark.parametrize("overrides", [
        {'sentiment': 2},
        {'emotions': [0, 0, 0, 0, 0, 0]},
        {'emotions': [0, 2, 0, 0, 0, 0, 0]},
        {'emotions': [1, 0, 0, 0, 0, 0, 1]},
        {'utterance_id': ''},
    ])
    def test_label_violations_name_line(self, tmp_path, overrides):
        path = write_lines(tmp_path / "bad.jsonl", [
            header_line(), video_line("v1", [utterance_record("a", **overrides)]),
        ])
        with pytest.raises(DatasetError) as exc:
            load_dataset(path)
        assert exc.value.locus == "line 2"

    @pytest.mark.parametrize("overrides", [
        {'sentiment': True},
        {'sentiment': 1.0},
        {'sentiment': "1"},
        {'emotions': [0, 0, 0, True, 0, 0, 0]},
        {'emotions': [0, 0, 0, 1.0, 0, 0, 0]},
    ])
    def test_labels_must_be_integers(self, tmp_path, overrides):
        path = write_lines(tmp_path / "bad.jsonl", [
            header_line(), video_line("v1", [utterance_record("a", **overrides)]),
        ])
        with pytest.raises(DatasetError) as exc:
            load_dataset(path)
        assert exc.value.locus == "line 2"

    @pytest.mark.parametrize("field,literal", [
        ('text', 'NaN'),
        ('acoustic', 'Infinity'),
        ('visual', '-Infinity'),
    ])
    def test_non_finite_features_rejected(self, tmp_path, field, literal):
        record = utterance_record("odd")
        record[field][1] = "__LITERAL__"
        line = video_line("v1", [utterance_record("fine"), record]).replace('"__LITERAL__"', literal)
        path = write_lines(tmp_path / "bad.jsonl", [header_line(), line])
        with pytest.raises(DatasetError) as exc:
            load_dataset(path)
        assert exc.value.locus == "line 2"
        assert "utterance odd" in str(exc.value)
        assert f"{field}[1]" in str(exc.value)

    def test_header_only_file(self, tmp_path):
        path = write_lines(tmp_path / "empty.jsonl", [header_line()])
        with pytest.raises(DatasetError, match="no videos"):
            load_dataset(path)

    def test_video_without_utterances(self, tmp_path):
        path = write_lines(tmp_path / "bad.jsonl", [header_line(), video_line("v1", [])])
        with pytest.raises(DatasetError):
            load_dataset(path)

    def test_duplicate_video_ids(self, tmp_path):
        path = write_lines(tmp_path / "dup.jsonl", [
            header_line(),
            video_line("v1", [utterance_record("a")]),
            video_line("v1", [utterance_record("b")]),
        ])
        with pytest.raises(DatasetError, match="duplicate"):
            load_dataset(path)


class TestSaveDataset:
    """Writing dataset files."""

    def test_round_trip_is_exact(self, tmp_path):
        dataset = make_dataset(n_videos=3, seed=8)
        path = save_dataset(dataset, tmp_path / "nested" / "out.jsonl")
        loaded = load_dataset(path)
        assert [v.video_id for v in loaded] == [v.video_id for v in dataset]
        for a, b in zip(loaded, dataset):
            for modality in Modality:
                assert np.array_equal(a.features(modality), b.features(modality))
        assert dumps_dataset(loaded) == dumps_dataset(dataset)

    def test_header_first(self):
        text = dumps_dataset(make_dataset(n_videos=1))
        assert json.loads(text.splitlines()[0]) == {'format': 'mtmm-es/1', 'dims': [4, 3, 2]}


class TestDatasetModel:
    """In-memory invariants."""

    def test_dims_enforced(self):
        with pytest.raises(DatasetDimensionError):
            Dataset(videos=[make_video("v", 2, dims=(4, 3, 3))], dims=(4, 3, 2))

    def test_in_memory_utterance_rejects_nan(self):
        record = utterance_record("u0")
        record['text'][0] = float('nan')
        with pytest.raises(ValueError, match="not a finite number"):
            Utterance(**record)

    def test_nonpositive_dims(self):
        with pytest.raises(DatasetError):
            Dataset(videos=[], dims=(4, 0, 2))

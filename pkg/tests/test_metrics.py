import unittest
from itertools import product

import numpy as np

from errors import DimensionMismatchError, EmptySetError, InvalidInputError, UndefinedMetricError
from metrics import auc, brier, evaluate, iou


def pairwise_auc(scores, labels) -> float:
    scores, labels = np.asarray(scores), np.asarray(labels)
    pos, neg = scores[labels == 1], scores[labels == 0]
    won = sum(1.0 if p > q else 0.5 if p == q else 0.0 for p, q in product(pos, neg))
    return won / (len(pos) * len(neg))


class TestBrier(unittest.TestCase):
    def test_examples(self):
        self.assertEqual(brier([1.0, 0.0, 1.0], [1, 0, 1]), 0.0)
        self.assertTrue(np.isclose(brier([0.5] * 5, [1, 0, 0, 1, 1]), 0.25))
        self.assertTrue(np.isclose(brier([0.8, 0.3], [1, 0]), 0.065))

    def test_minimized_at_base_rate(self):
        labels = np.array([1, 0, 0, 1, 1, 0, 1, 1])
        grid = np.linspace(0, 1, 1001)
        values = [brier(np.full(len(labels), p), labels) for p in grid]
        self.assertTrue(np.isclose(grid[int(np.argmin(values))], labels.mean()))

    def test_bad_input(self):
        with self.assertRaises(EmptySetError):
            brier([], [])
        with self.assertRaises(DimensionMismatchError):
            brier([0.5], [1, 0])
        with self.assertRaises(InvalidInputError):
            brier([1.5], [1])
        with self.assertRaises(InvalidInputError):
            brier([0.5], [2])


class TestAUC(unittest.TestCase):
    def test_examples(self):
        self.assertEqual(auc([0.9, 0.8, 0.1, 0.2], [1, 1, 0, 0]), 1.0)
        self.assertEqual(auc([0.3] * 6, [1, 0, 1, 0, 0, 1]), 0.5)
        self.assertEqual(auc([0.9, 0.4, 0.6], [1, 0, 0]), 1.0)

    def test_single_class_is_undefined(self):
        with self.assertRaises(UndefinedMetricError):
            auc([0.1, 0.7], [1, 1])
        with self.assertRaises(UndefinedMetricError):
            auc([0.1, 0.7], [0, 0])

    def test_matches_pairwise_count_with_ties(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            n = int(rng.integers(2, 40))
            scores = rng.integers(0, 5, size=n) / 4.0
            labels = rng.integers(0, 2, size=n)
            labels[:2] = [0, 1]
            self.assertEqual(auc(scores, labels), pairwise_auc(scores, labels))

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(1)
        scores = rng.normal(size=300)
        labels = (scores + rng.normal(size=300) > 0).astype(int)
        base = auc(scores, labels)
        for transform in (np.exp, np.arctan, lambda s: 3 * s ** 3 + s - 7):
            self.assertEqual(auc(transform(scores), labels), base)

    def test_negated_scores_complement(self):
        rng = np.random.default_rng(2)
        scores = rng.uniform(size=200)
        labels = rng.integers(0, 2, size=200)
        self.assertTrue(np.isclose(auc(scores, labels) + auc(-scores, labels), 1.0))


class TestIoU(unittest.TestCase):
    def test_examples(self):
        self.assertEqual(iou([0.9, 0.1, 0.7], [1, 0, 1]), 1.0)
        self.assertEqual(iou([0.9, 0.1, 0.2], [0, 1, 0]), 0.0)
        probs = [0.9, 0.8, 0.7, 0.6, 0.2, 0.1]
        labels = [1, 1, 1, 0, 1, 0]
        self.assertTrue(np.isclose(iou(probs, labels), 0.6))

    def test_threshold_is_inclusive(self):
        self.assertEqual(iou([0.5], [1]), 1.0)

    def test_empty_union_is_undefined(self):
        with self.assertRaises(UndefinedMetricError):
            iou([0.1, 0.2], [0, 0])

    def test_bad_threshold(self):
        with self.assertRaises(InvalidInputError):
            iou([0.5], [1], tau=1.0)

    def test_threshold_above_every_score(self):
        rng = np.random.default_rng(3)
        labels = rng.integers(0, 2, size=500)
        labels[0] = 1
        probs = 0.4 * labels + rng.uniform(0, 0.5, size=500)
        # no false positives above 0.5, so the predicted set only loses true positives
        values = [iou(probs, labels, tau) for tau in np.linspace(0.5, 0.95, 10)]
        self.assertTrue(np.all(np.diff(values) <= 0))
        self.assertEqual(values[-1], 0.0)


class TestEvaluate(unittest.TestCase):
    def test_report(self):
        report = evaluate([0.8, 0.3], [1, 0], bce=0.2)
        self.assertTrue(np.isclose(report.brier, 0.065))
        self.assertEqual((report.auc, report.iou, report.n_pos, report.n_neg), (1.0, 1.0, 1, 1))
        self.assertEqual(report.to_dict()["bce"], 0.2)

    def test_undefined_metrics_are_none(self):
        report = evaluate([0.1, 0.2], [0, 0])
        self.assertIsNone(report.auc)
        self.assertIsNone(report.iou)
        self.assertTrue(np.isclose(report.brier, 0.025))


if __name__ == '__main__':
    unittest.main()

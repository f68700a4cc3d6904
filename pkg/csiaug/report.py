#!/usr/bin/python

"""Ablation reports

Accuracies are shown in percent with one decimal as mean±std, next to
the change of the mean against the "none" arm. The baseline row has no
change marker.
"""

import csv
import io
import json
import math
import os

from csiaug.harness import BASELINE, RunSummary

MARKDOWN = 'md'
CSV = 'csv'
JSON = 'json'
FORMATS = (MARKDOWN, CSV, JSON)

UP = '↑'
DOWN = '↓'
ABOUT = '∼'


def _percent(value):
    if math.isnan(value):
        return 'n/a'
    return '%.1f' % (100.0 * value,)


def format_delta(delta):
    """'↑ 6.1', '↓ 2.4' or '∼ 0.0' for a change in accuracy (a fraction)"""
    if math.isnan(delta):
        return 'n/a'
    text = '%.1f' % (abs(100.0 * delta),)
    if text == '0.0':
        return '%s 0.0' % (ABOUT,)
    return '%s %s' % (UP if delta > 0 else DOWN, text)


def format_cell(mean, std):
    return '%s±%s' % (_percent(mean), _percent(std))


def format_markdown(summary):
    header = ['Augmentation']
    for subset in summary.eval_subsets:
        header += ['%s -> %s' % (summary.train_subset, subset), 'Change']
    lines = [
        '| %s |' % (' | '.join(header),),
        '|%s|' % ('|'.join(['---'] * len(header)),),
    ]
    for arm in summary.arm_names:
        row = [arm]
        for subset in summary.eval_subsets:
            row.append(format_cell(*summary.stats(arm, subset)))
            row.append('' if arm == BASELINE else format_delta(summary.delta(arm, subset)))
        lines.append('| %s |' % (' | '.join(row),))
    failures = summary.failures
    if failures:
        lines.append('')
        for r in sorted(failures, key=lambda r: (r.arm, r.run_index)):
            lines.append('Run %d of %s failed: %s' % (r.run_index, r.arm, r.error))
    return '\n'.join(lines) + '\n'


def format_csv(summary):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator='\n')
    header = ['arm']
    for subset in summary.eval_subsets:
        header += ['%s:mean' % (subset,), '%s:std' % (subset,), '%s:delta' % (subset,)]
    writer.writerow(header)
    for arm in summary.arm_names:
        row = [arm]
        for subset in summary.eval_subsets:
            mean, std = summary.stats(arm, subset)
            row += [repr(mean), repr(std), repr(summary.delta(arm, subset))]
        writer.writerow(row)
    return buf.getvalue()


def parse_csv_report(text):
    """Inverse of format_csv: {arm: {subset: {'mean', 'std', 'delta'}}}"""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    rows = {}
    for record in reader:
        if not record:
            continue
        arm = record[0]
        rows[arm] = {}
        for column, value in zip(header[1:], record[1:]):
            subset, _, field = column.rpartition(':')
            rows[arm].setdefault(subset, {})[field] = float(value)
    return rows


def format_json(summary):
    return json.dumps(summary.to_dict(), indent=1, sort_keys=True) + '\n'


def load_summary(path):
    with open(path, 'r') as f:
        return RunSummary.from_dict(json.load(f))


_FORMATTERS = {
    MARKDOWN: format_markdown,
    CSV: format_csv,
    JSON: format_json,
}


def format_report(summary, fmt=MARKDOWN):
    try:
        formatter = _FORMATTERS[fmt]
    except KeyError:
        raise ValueError("unknown report format %r" % (fmt,))
    return formatter(summary)


def write_reports(summary, out, formats=FORMATS):
    """Write results.json, report.md and report.csv under out

    Returns the written paths in the order of formats.
    """
    if not os.path.isdir(out):
        os.makedirs(out)
    names = {JSON: 'results.json', MARKDOWN: 'report.md', CSV: 'report.csv'}
    paths = []
    for fmt in formats:
        path = os.path.join(out, names[fmt])
        with io.open(path, 'w', encoding='utf-8', newline='\n') as f:
            f.write(format_report(summary, fmt))
        paths.append(path)
    return paths

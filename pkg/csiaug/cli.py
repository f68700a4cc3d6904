#!/usr/bin/python

"""csiaug command line

    csiaug ingest  --config CFG [LOG ...]
    csiaug augment --config CFG --seed S --out DIR FILE ...
    csiaug preview FILE PNG
    csiaug ablate  --config CFG [--jobs N] [--format md|csv|json]
    csiaug verify  [--config CFG | --synthetic DIR]
    csiaug fetch   --config CFG --baseurl URL [SUBSET ...]

Results go to stdout, progress and diagnostics to stderr.
"""

import argparse
import concurrent.futures
import logging
import os
import sys

from csiaug import augment, config, dataset, fetch, harness, report, specfile
from csiaug.csi import read_csi_log
from csiaug.errors import CsiAugError, SchemaError, EXIT_OK, EXIT_FORMAT, EXIT_RUNTIME
from csiaug.spectro import series_from_records, segment

log = logging.getLogger('csiaug')


def _config(args, need_seed=False):
    if args.config is not None:
        cfg = config.load_config(args.config)
    else:
        body = {}
        if args.seed is not None:
            body['seed'] = args.seed
        elif not need_seed:
            body['seed'] = 0
        cfg = config.RunConfig(body, base_dir=os.getcwd())
    return cfg.override(seed=args.seed, out=args.out)


def _makedirs(d):
    if not os.path.isdir(d):
        os.makedirs(d)


def cmd_ingest(args):
    cfg = _config(args)
    ing = cfg.ingest
    if args.logs:
        paths = list(args.logs)
    else:
        cfg.check_paths(ingest=True)
        paths = ing.log_paths()
    label = args.label if args.label is not None else ing.label
    if label is None:
        raise SchemaError([('ingest.label', 'required to write a manifest')])
    mapping = ing.mapping()
    sel = ing.selection
    seg = cfg.segment
    subdir = os.path.join(cfg.out, ing.subset)
    _makedirs(subdir)
    entries = []
    for path in paths:
        records, stats = read_csi_log(path, mapping, sel)
        if not records:
            log.warning("%s: no CSI records", path)
            continue
        series = series_from_records(records, sel, seg.rate_hz)
        stem = os.path.splitext(os.path.basename(path))[0]
        segments = segment(series, seg.window, seg.hop)
        for k, spectrogram in enumerate(segments):
            rel = os.path.join(ing.subset, '%s_%04d.csis' % (stem, k))
            specfile.write_spectrogram(os.path.join(cfg.out, rel), spectrogram, label)
            entries.append(dataset.ManifestEntry(rel, label, ing.scenario, ing.system, ing.zone))
        log.info("%s: %d records, %d segments", path, stats.records, len(segments))
    manifest = dataset.build_manifest(ing.subset, entries, cfg.out)
    manifest_path = os.path.join(cfg.out, ing.subset + '.json')
    dataset.save_manifest(manifest_path, manifest)
    print("%d spectrograms from %d logs, manifest %s" % (len(entries), len(paths), manifest_path))
    return EXIT_OK


def _augment_one(path, index, spec, epoch, out, previews):
    x, label = specfile.read_spectrogram(path)
    y, drawlog = augment.apply_pipeline(x, spec, (epoch, index))
    name = os.path.basename(path)
    specfile.write_spectrogram(os.path.join(out, name), y, label)
    if previews:
        stem = os.path.splitext(name)[0]
        specfile.write_side_by_side(os.path.join(out, stem + '.png'), x, y)
    return drawlog


def cmd_augment(args):
    cfg = _config(args, need_seed=True)
    names = [os.path.basename(p) for p in args.files]
    clashes = sorted(set(n for n in names if names.count(n) > 1))
    if clashes:
        raise SchemaError([('files', 'duplicate file names %s' % (', '.join(clashes),))])
    spec = cfg.pipeline_spec()
    _makedirs(cfg.out)
    jobs = max(1, args.jobs)
    with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [
            pool.submit(_augment_one, path, i, spec, args.epoch, cfg.out, args.preview)
            for i, path in enumerate(args.files)
        ]
        drawlogs = [f.result() for f in futures]
    if args.drawlog is not None:
        with open(args.drawlog, 'w') as f:
            for d in drawlogs:
                f.write(d.to_json() + '\n')
    applied = sum(1 for d in drawlogs for e in d if e.applied)
    print("%d spectrograms augmented into %s (%d operator applications)" % (
        len(drawlogs), cfg.out, applied
    ))
    return EXIT_OK


def cmd_preview(args):
    x, _ = specfile.read_spectrogram(args.file)
    specfile.write_preview(args.image, x)
    print("%s: %dx%d" % (args.image, x.w, x.h))
    return EXIT_OK


def _load_subsets(cfg, names):
    subsets = {}
    for name in names:
        manifest = dataset.load_manifest(cfg.dataset.manifest_path(name))
        subsets[name] = dataset.load_samples(manifest, cfg.dataset.check_digests)
    return subsets


def cmd_ablate(args):
    cfg = _config(args, need_seed=True)
    if not cfg.experiment.body:
        raise SchemaError([('experiment', 'missing')])
    spec = cfg.experiment_spec()
    names = sorted(set([spec.train_subset] + spec.eval_subsets))
    cfg.check_paths(subsets=names)
    subsets = _load_subsets(cfg, names)
    summary = harness.run_ablation(
        spec, subsets, jobs=max(1, args.jobs),
        checkpoint_dir=os.path.join(cfg.out, 'checkpoints'),
    )
    paths = report.write_reports(summary, cfg.out)
    sys.stdout.write(report.format_report(summary, args.format))
    for p in paths:
        log.info("wrote %s", p)
    if summary.failures:
        log.error("%d runs failed", len(summary.failures))
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_verify(args):
    if args.synthetic is not None:
        paths = dataset.synthetic_catalogue(args.synthetic)
        check_digests = True
    else:
        cfg = _config(args)
        if not cfg.dataset.manifests:
            raise SchemaError([('dataset.manifests', 'no subsets to verify')])
        names = sorted(cfg.dataset.manifests)
        cfg.check_paths(subsets=names)
        paths = dict((n, cfg.dataset.manifest_path(n)) for n in names)
        check_digests = cfg.dataset.check_digests
    reports = []
    for name in sorted(paths):
        r = dataset.verify_manifest(dataset.load_manifest(paths[name]), check_digests)
        reports.append(r)
        print(str(r))
    classes = [sum(r.found[label] for r in reports) for label in dataset.LABELS]
    print("total %d, classes %s" % (sum(classes), '/'.join(str(n) for n in classes)))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FORMAT


def cmd_fetch(args):
    cfg = _config(args)
    names = args.subsets or sorted(cfg.dataset.manifests)
    cfg.check_paths(subsets=names)
    session = fetch.FetchSession(args.baseurl)
    try:
        total = 0
        for name in names:
            manifest = dataset.load_manifest(cfg.dataset.manifest_path(name))
            total += fetch.fetch_manifest_files(manifest, session)
    finally:
        session.close()
    print("%d files downloaded" % (total,))
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', metavar='PATH', help='JSON run configuration')
    common.add_argument('--seed', type=int, metavar='U64', help='override the configured seed')
    common.add_argument('--out', metavar='DIR', help='override the output directory')
    common.add_argument('--jobs', type=int, default=1, metavar='N', help='parallel workers')
    common.add_argument('--format', choices=report.FORMATS, default=report.MARKDOWN,
                        help='report format printed to stdout')
    common.add_argument('-v', '--verbose', action='store_true', help='debug logging')
    common.add_argument('-q', '--quiet', action='store_true', help='warnings and errors only')

    parser = argparse.ArgumentParser(prog='csiaug', description='WiFi CSI spectrogram toolkit')
    sub = parser.add_subparsers(dest='command')
    sub.required = True

    p = sub.add_parser('ingest', parents=[common], help='raw CSI logs to spectrogram files')
    p.add_argument('logs', nargs='*', help='logs to ingest instead of ingest.paths')
    p.add_argument('--label', type=int, choices=dataset.LABELS, help='label of every segment')
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser('augment', parents=[common], help='apply the configured pipeline')
    p.add_argument('files', nargs='+', help='spectrogram files')
    p.add_argument('--epoch', type=int, default=0, help='epoch part of the sample key')
    p.add_argument('--drawlog', metavar='PATH', help='write every draw as JSON lines')
    p.add_argument('--preview', action='store_true', help='write before/after PNGs')
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser('preview', parents=[common], help='render a spectrogram as PNG')
    p.add_argument('file')
    p.add_argument('image')
    p.set_defaults(func=cmd_preview)

    p = sub.add_parser('ablate', parents=[common], help='run an ablation experiment')
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser('verify', parents=[common], help='check dataset manifests')
    p.add_argument('--synthetic', metavar='DIR',
                   help='verify a generated stand-in catalogue written to DIR')
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser('fetch', parents=[common], help='download missing dataset files')
    p.add_argument('subsets', nargs='*', help='subsets to fetch (default: all configured)')
    p.add_argument('--baseurl', required=True, help='URL the manifest paths are relative to')
    p.set_defaults(func=cmd_fetch)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr,
                        format='%(levelname)s %(name)s: %(message)s')
    try:
        return args.func(args)
    except CsiAugError as e:
        log.error("%s", e)
        return e.exit_code
    except (IOError, OSError) as e:
        log.error("%s", e)
        return EXIT_RUNTIME


if __name__ == '__main__':
    sys.exit(main())

#!/usr/bin/env python3
"""
shapestring command line

Encodes contours into symbol strings, aligns strings, matches shapes,
builds and queries shape indexes and runs bulls-eye evaluations.
"""

import argparse
import io
import logging
import sys
from pathlib import Path
from typing import List, Optional

import pandas as pd
from dotenv import load_dotenv

from .exceptions import ShapeStringError
from .services.alignment import nw_fill, traceback
from .services.retrieval import (
    angle_bin_sweep, items_from_index, load_index, save_index,
)
from .services.shape_pipeline import ShapeEncodingPipeline
from .services.synthetic import gen_synthetic, load_dataset, write_dataset
from .utils.config import DEFAULTS, HELP, RunConfig, format_value
from .utils.io_utils import (
    atomic_write_bytes, atomic_write_json, atomic_write_text, atomic_write_tsv, load_shape, read_tokens,
    write_symbols,
)
from .utils.logger import setup_logging

logger = logging.getLogger('shapestring.cli')


def _config_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    group = parent.add_argument_group('configuration')
    group.add_argument('--config', metavar='FILE', help='flat key=value configuration file')
    group.add_argument('--log-file', metavar='FILE', help='also write logs to FILE')
    for key, default in DEFAULTS.items():
        group.add_argument(
            f"--{key.replace('_', '-')}",
            dest=key,
            metavar='VALUE',
            default=None,
            help=f"{HELP[key]} (default: {format_value(default)})",
        )
    return parent


def build_parser() -> argparse.ArgumentParser:
    parent = _config_parent()
    parser = argparse.ArgumentParser(
        prog='shapestring',
        description='Shape contour encoding, alignment and retrieval',
    )
    commands = parser.add_subparsers(dest='command', metavar='COMMAND')
    commands.required = True

    p = commands.add_parser('encode', parents=[parent], help='encode a contour or mask into a symbol string')
    p.add_argument('input', help='contour JSON, mask JSON or PGM mask')
    p.add_argument('-o', '--output', help='symbol file (default: stdout)')
    p.add_argument('--dump-sectors', metavar='FILE', help='write sector slices as JSON')
    p.add_argument('--dump-sections', metavar='FILE', help='write per-section features as JSON')

    p = commands.add_parser('align', parents=[parent], help='align two symbol files')
    p.add_argument('--a', required=True, metavar='FILE', help='first symbol file')
    p.add_argument('--b', required=True, metavar='FILE', help='second symbol file')
    p.add_argument('--dump-matrix', metavar='FILE', help='write the fill matrix as TSV')

    p = commands.add_parser('match', parents=[parent], help='end-to-end similarity of two shapes')
    p.add_argument('a', help='first contour or mask')
    p.add_argument('b', help='second contour or mask')
    p.add_argument('--trace', metavar='FILE', help='write the pose alignment trace as JSON')

    p = commands.add_parser('index', help='build, extend or inspect a shape index')
    index_commands = p.add_subparsers(dest='index_command', metavar='ACTION')
    index_commands.required = True
    b = index_commands.add_parser('build', parents=[parent], help='build an index')
    b.add_argument('inputs', nargs='*', help='contour or mask files')
    b.add_argument('--dataset', metavar='DIR', help='dataset directory with manifest.tsv')
    b.add_argument('--label', help='class label for the input files')
    b.add_argument('-o', '--output', required=True, help='index file')
    a = index_commands.add_parser('add', parents=[parent], help='add shapes to an index')
    a.add_argument('index', help='index file, rewritten in place')
    a.add_argument('inputs', nargs='+', help='contour or mask files')
    a.add_argument('--label', help='class label for the input files')
    i = index_commands.add_parser('info', parents=[parent], help='describe an index')
    i.add_argument('index', help='index file')

    p = commands.add_parser('query', parents=[parent], help='rank index records against a shape')
    p.add_argument('index', help='index file')
    p.add_argument('input', help='query contour or mask')
    p.add_argument('-k', type=int, default=10, help='number of hits (default: 10)')
    p.add_argument('--pairwise-align', action='store_true',
                   help='align the query onto every record before encoding both')
    p.add_argument('-o', '--output', help='ranked TSV (default: stdout)')

    p = commands.add_parser('eval', parents=[parent], help='bulls-eye evaluation')
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument('--index', metavar='FILE', help='labeled index file')
    source.add_argument('--dataset', metavar='DIR', help='dataset directory with manifest.tsv')
    p.add_argument('--depth', type=int, help='retrieval depth (default: twice the class size)')
    p.add_argument('--angle-bins', metavar='K,K,...', help='sweep the angle bin count, e.g. 3,5,6')
    p.add_argument('--report', metavar='FILE', help='write the per-query or sweep TSV')
    p.add_argument('--plot', metavar='FILE', help='write an SVG bar plot of the sweep')

    p = commands.add_parser('gen', parents=[parent], help='generate a synthetic labeled dataset')
    p.add_argument('-o', '--output', required=True, metavar='DIR', help='dataset directory')
    p.add_argument('--classes', type=int, default=5, help='number of classes (default: 5)')
    p.add_argument('--per-class', type=int, default=8, help='instances per class (default: 8)')
    p.add_argument('--noise', type=float, default=0.0, help='radial noise level (default: 0)')
    p.add_argument('--seed', type=int, default=0, help='random seed (default: 0)')

    p = commands.add_parser('config', parents=[parent], help='print the effective configuration')
    p.add_argument('-o', '--output', help='write it to a file instead')

    return parser


def load_run_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, environment, --config file, then individual flags"""
    config = RunConfig(getattr(args, 'config', None))
    overrides = {key: getattr(args, key) for key in DEFAULTS if getattr(args, key, None) is not None}
    config.update(overrides)
    return config


def _emit(text: str, output: Optional[str]):
    if output:
        atomic_write_text(output, text)
    else:
        sys.stdout.write(text)


def _input_items(paths: List[str], label: Optional[str]):
    return [(Path(p).stem, label, load_shape(p)) for p in paths]


def cmd_encode(args, config: RunConfig) -> int:
    pipeline = ShapeEncodingPipeline(config)
    details = pipeline.encoder.details(load_shape(args.input))
    if args.output:
        write_symbols(args.output, details.symbols)
    else:
        print(details.symbols)
    if args.dump_sectors:
        atomic_write_json(args.dump_sectors, {
            'circle': details.circle.to_dict(),
            'slices': details.sector_rows(),
        })
    if args.dump_sections:
        atomic_write_json(args.dump_sections, details.section_rows())
    logger.info(f"Encoded {args.input}: {len(details.symbols) // 5} sections")
    return 0


def cmd_align(args, config: RunConfig) -> int:
    table = config.score_table()
    a = read_tokens(args.a)
    b = read_tokens(args.b)
    matrix = nw_fill(a, b, table)
    result = traceback(matrix, t=table)
    top, bottom = result.rows()

    print(f"score\t{result.score:g}")
    print(f"normalized\t{result.normalized:g}")
    print('a\t' + ' '.join(top))
    print('b\t' + ' '.join(bottom))
    print('scores\t' + ' '.join(f'{s:g}' for s in result.op_scores()))

    if args.dump_matrix:
        frame = pd.DataFrame(
            matrix.F,
            index=['-'] + [t.name for t in matrix.a],
            columns=['-'] + [t.name for t in matrix.b],
        )
        atomic_write_text(args.dump_matrix, frame.to_csv(sep='\t', float_format='%g'))
    return 0


def cmd_match(args, config: RunConfig) -> int:
    pipeline = ShapeEncodingPipeline(config)
    result = pipeline.match(load_shape(args.a), load_shape(args.b))
    if not result['success']:
        raise ShapeStringError(result['error'])
    print(f"similarity\t{result['similarity']:.6f}")
    print(f"a\t{result['symbols_a']}")
    print(f"b\t{result['symbols_b']}")
    if args.trace:
        atomic_write_json(args.trace, result['alignment'])
    return 0


def cmd_index(args, config: RunConfig) -> int:
    if args.index_command == 'info':
        index = load_index(args.index)
        print(f"version\t{index.version}")
        print(f"fingerprint\t{index.fingerprint}")
        print(f"records\t{len(index)}")
        for label, size in sorted(index.class_sizes().items(), key=lambda kv: str(kv[0])):
            print(f"class\t{label if label is not None else '-'}\t{size}")
        for key, value in sorted(index.settings.items()):
            print(f"setting\t{key}={value}")
        return 0

    pipeline = ShapeEncodingPipeline(config)
    if args.index_command == 'build':
        items = []
        if args.dataset:
            items.extend(load_dataset(args.dataset))
        items.extend(_input_items(args.inputs, args.label))
        if not items:
            raise ValueError("index build needs --dataset or input files")
        index, batch = pipeline.build_index(items)
        output = args.output
    else:
        index, batch = pipeline.build_index(_input_items(args.inputs, args.label), load_index(args.index))
        output = args.index

    if not batch['success']:
        raise ShapeStringError(f"no shape could be encoded: {'; '.join(batch['errors'][:3])}")
    for error in batch['errors']:
        logger.warning(f"Skipped {error}")
    save_index(index, output)
    logger.info(f"Index {output}: {len(index)} records ({batch['successful_shapes']}/{batch['total_shapes']} encoded)")
    return 0


def cmd_query(args, config: RunConfig) -> int:
    if args.pairwise_align:
        config.set('pose_mode', 'pairwise')
    pipeline = ShapeEncodingPipeline(config)
    result = pipeline.query(load_index(args.index), load_shape(args.input), args.k)['result']
    frame = result.to_frame()
    _emit(frame.to_csv(sep='\t', index=False, float_format='%.6f'), args.output)
    return 0


def _plot_sweep(frame: pd.DataFrame, path: str):
    import matplotlib
    matplotlib.use('Agg')
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.bar([str(k) for k in frame['angle_bins']], frame['bullseye'], color='#4c72b0')
    ax.set_xlabel('angle bins K')
    ax.set_ylabel('bulls-eye score')
    ax.set_ylim(0, 1)
    fig.tight_layout()
    buffer = io.BytesIO()
    fig.savefig(buffer, format='svg')
    plt.close(fig)
    atomic_write_bytes(path, buffer.getvalue())


def cmd_eval(args, config: RunConfig) -> int:
    pipeline = ShapeEncodingPipeline(config)

    if args.angle_bins:
        bins = [int(k) for k in args.angle_bins.split(',') if k.strip()]
        if args.dataset:
            items = load_dataset(args.dataset)
        else:
            items = items_from_index(load_index(args.index))
        frame = angle_bin_sweep(items, pipeline.encoder, bins, args.depth, pipeline.score_table,
                                config.get('n_jobs'))
        sys.stdout.write(frame.to_csv(sep='\t', index=False, float_format='%.6f'))
        if args.report:
            atomic_write_tsv(args.report, frame)
        if args.plot:
            _plot_sweep(frame, args.plot)
        return 0

    if args.dataset:
        index, batch = pipeline.build_index(load_dataset(args.dataset))
        if batch['errors']:
            raise ShapeStringError(f"dataset shapes failed to encode: {'; '.join(batch['errors'][:3])}")
    else:
        index = load_index(args.index)
    report = pipeline.evaluate(index, args.depth)
    print(report.summary())
    if args.report:
        atomic_write_tsv(args.report, report.per_query)
    if args.plot:
        logger.warning("--plot needs --angle-bins; no plot written")
    return 0


def cmd_gen(args, config: RunConfig) -> int:
    items = gen_synthetic(args.classes, args.per_class, args.noise, args.seed)
    manifest = write_dataset(items, args.output)
    logger.info(f"Wrote {len(items)} contours and {manifest}")
    return 0


def cmd_config(args, config: RunConfig) -> int:
    _emit('\n'.join(config.to_lines()) + '\n', args.output)
    return 0


COMMANDS = {
    'encode': cmd_encode,
    'align': cmd_align,
    'match': cmd_match,
    'index': cmd_index,
    'query': cmd_query,
    'eval': cmd_eval,
    'gen': cmd_gen,
    'config': cmd_config,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point; returns the process exit code"""
    load_dotenv()
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        config = load_run_config(args)
        setup_logging(config.get('log_level'), getattr(args, 'log_file', None))
        return COMMANDS[args.command](args, config)
    except KeyboardInterrupt:
        print("error: interrupted", file=sys.stderr)
        return 1
    except (ShapeStringError, OSError, ValueError, KeyError) as e:
        message = str(e).splitlines()[0] if str(e) else type(e).__name__
        logger.debug("Command failed", exc_info=True)
        print(f"error: {message}", file=sys.stderr)
        return 1


if __name__ == '__main__':
    sys.exit(main())

"""synth: write a deterministic synthetic dataset file."""

from typing import Any, Dict

from ..core.logger import get_logger, log_execution
from ..ingestion.synthetic import make_synth_spec, synthesize_dataset
from ..persistence.dataset_store import save_dataset
from ..persistence.models import Split
from .common import parse_dims

logger = get_logger(__name__)


def register(subparsers):
    parser = subparsers.add_parser('synth', help='Generate a synthetic dataset')
    parser.add_argument('--videos', type=int, default=8, help='Number of videos')
    parser.add_argument('--u-min', type=int, default=3, help='Minimum utterances per video')
    parser.add_argument('--u-max', type=int, default=8, help='Maximum utterances per video')
    parser.add_argument('--dims', default='20,12,12', help='Feature dims text,acoustic,visual')
    parser.add_argument('--noise', type=float, default=0.05, help='Feature noise scale')
    parser.add_argument('--positive-rate', type=float, help='Share of positive utterances')
    parser.add_argument('--correlation', type=float, default=0.5,
                        help='Sentiment/emotion coupling in [0, 1]')
    parser.add_argument('--split', choices=[s.value for s in Split], default=Split.TRAIN.value,
                        help='Split tag; splits of one seed share label prototypes')
    parser.add_argument('--seed', type=int, default=0, help='Generation seed')
    parser.add_argument('--out', required=True, help='Output JSONL path')
    parser.set_defaults(handler=run)


@log_execution
def run(args) -> int:
    fields: Dict[str, Any] = {
        'n_videos': args.videos,
        'u_range': (args.u_min, args.u_max),
        'dims': parse_dims(args.dims),
        'noise_scale': args.noise,
        'correlation': args.correlation,
    }
    if args.positive_rate is not None:
        fields['class_proportions'] = {'positive': args.positive_rate}
    spec = make_synth_spec(**fields)

    dataset = synthesize_dataset(spec, seed=args.seed, split=Split(args.split))
    path = save_dataset(dataset, args.out)
    print(f"wrote {len(dataset)} videos ({dataset.num_utterances} utterances) to {path}")
    return 0

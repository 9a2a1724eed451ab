"""Density sweep: one scenario run (and one output file pair) per density."""

import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, List, Optional, Sequence

from ..utils.rng import derive_seed
from ..utils.tools import dataset_path
from .models import RunConfig, RunSummary
from .scenario_engine import run
from .settings_manager import DavnSettings

logger = logging.getLogger(__name__)

StatusCallback = Callable[[str, Any], None]


@dataclass
class SweepMember:
    index: int
    density: Optional[int]
    seed: int
    dataset_path: Optional[Path]
    summary_path: Optional[Path]
    summary: RunSummary


def _run_member(index: int, config: RunConfig) -> SweepMember:
    result = run(config)
    return SweepMember(
        index=index,
        density=config.density,
        seed=config.seed,
        dataset_path=result.dataset_path,
        summary_path=result.summary_path,
        summary=result.summary,
    )


class SweepService:
    """
    Builds one RunConfig per density from the effective settings and runs
    them, in worker processes when run.workers > 1. Member i runs with seed
    `run.seed XOR i` and owns its output files.
    """

    def __init__(self, settings: DavnSettings):
        self.settings = settings

    def member_configs(self, densities: Optional[Sequence[int]] = None) -> List[RunConfig]:
        settings = self.settings
        output_dir = Path(settings.run.output_dir)
        if settings.vehicles.trace_path is not None:
            base = settings.to_run_config(None, dataset_path(output_dir, None))
            return [base]
        configs = []
        for index, density in enumerate(densities if densities is not None else settings.vehicles.density):
            config = settings.to_run_config(density, dataset_path(output_dir, density))
            configs.append(config.model_copy(update={"seed": derive_seed(settings.run.seed, index)}))
        return configs

    def run(
        self,
        densities: Optional[Sequence[int]] = None,
        callback: Optional[StatusCallback] = None,
    ) -> List[SweepMember]:
        configs = self.member_configs(densities)
        total = len(configs)
        workers = min(self.settings.run.workers, total)
        notify = callback or (lambda kind, payload: None)
        members: List[SweepMember] = []

        if workers <= 1:
            for index, config in enumerate(configs):
                notify("status", f"Running {index + 1}/{total}: density={config.density}")
                members.append(_run_member(index, config))
                notify("done", members[-1])
        else:
            logger.info(f"Running {total} sweep members on {workers} worker processes")
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(_run_member, index, config) for index, config in enumerate(configs)]
                for future in as_completed(futures):
                    member = future.result()
                    notify("done", member)
                    members.append(member)
            members.sort(key=lambda m: m.index)

        for member in members:
            logger.info(
                f"density={member.density}: {member.dataset_path} "
                f"(expired {member.summary.expired_fraction:.2%}, unstable steps {member.summary.unstable_steps})"
            )
        return members

"""
Runner de experimentos bjlab
----------------------------
1. Planifica los ensayos: (grupo de eps, índice de ensayo)
2. Deriva un stream Philox por ensayo desde (seed, grupo, ensayo), de modo
   que el resultado no depende del orden de ejecución ni del número de
   workers
3. Reparte los ensayos con joblib y conserva el orden de la planificación
4. Arma el DataFrame de filas, el resumen y los testigos de fallos

Author: ML Engineering Team
Version: 1.0
"""

import os
import time
import logging
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

from src.harness.config import ExperimentConfig
from src.harness.trials import TrialOutcome, run_trial

logger = logging.getLogger(__name__)

CSV_HEADER = '#v1 bjlab trial report'
FLOAT_FORMAT = '%.17g'
STATUSES = ('pass', 'fail', 'boundary')


class TrialTask(NamedTuple):
    group: int
    epsilon: Optional[float]
    trial: int


@dataclass
class RunReport:
    """Filas por ensayo (en orden de planificación) y resumen agregado."""
    mode: str
    rows: pd.DataFrame
    summary: Dict
    witnesses: Dict[int, str] = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return self.summary['fail'] > 0


def trial_rng(seed: int, group: int, trial: int) -> np.random.Generator:
    """Generator Philox independiente para (seed, grupo, ensayo)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(group, trial))))


def plan_tasks(config: ExperimentConfig) -> List[TrialTask]:
    """Orden de filas del reporte: (índice de eps, índice de ensayo)."""
    if config.mode == 'isometry-test':
        if config.factors is not None:
            return [TrialTask(0, None, 0)]
        return [TrialTask(i, eps, i) for i, eps in enumerate(config.epsilons)]

    if config.mode == 'check-ortho':
        epsilons = [0.0]
    elif config.mode == 'axioms':
        epsilons = [None]
    else:
        epsilons = config.epsilons
    return [TrialTask(i, eps, t) for i, eps in enumerate(epsilons) for t in range(config.trials)]


def _execute(config: ExperimentConfig, task: TrialTask) -> TrialOutcome:
    rng = trial_rng(config.seed, task.group, task.trial)
    return run_trial(config, task.epsilon, rng, task.trial)


def _max_abs_margin(passed: pd.DataFrame) -> Optional[float]:
    cols = [c for c in passed.columns if c.endswith('_margin')]
    if not cols or passed.empty:
        return None
    values = passed[cols].apply(pd.to_numeric, errors='coerce').abs().to_numpy()
    if np.all(np.isnan(values)):
        return None
    return float(np.nanmax(values))


def summarize(config: ExperimentConfig, rows: pd.DataFrame, wall_time: float) -> Dict:
    """Conteos pass/fail/boundary totales y por eps; pass + fail + boundary = filas."""
    counts = rows['status'].value_counts()
    summary = {
        'mode': config.mode,
        'seed': config.seed,
        'trials': int(len(rows)),
        **{s: int(counts.get(s, 0)) for s in STATUSES},
    }

    if 'epsilon' in rows.columns:
        per_eps = []
        for eps, group in rows.groupby('epsilon', sort=False):
            group_counts = group['status'].value_counts()
            per_eps.append({
                'epsilon': float(eps),
                'trials': int(len(group)),
                **{s: int(group_counts.get(s, 0)) for s in STATUSES},
            })
        summary['per_epsilon'] = per_eps

    summary['max_abs_margin_pass'] = _max_abs_margin(rows[rows['status'] == 'pass'])
    if 'max_residual' in rows.columns:
        summary['max_residual'] = float(rows['max_residual'].max())
    if 'scalar_multiple_of_isometry' in rows.columns:
        summary['scalar_multiple_of_isometry'] = rows['scalar_multiple_of_isometry'].tolist()
        # trials cuenta operadores; samples, las muestras aleatorias de todos ellos
        summary['samples'] = int(rows['samples'].sum())
    summary['wall_time_s'] = round(wall_time, 3)
    return summary


def run(config: ExperimentConfig, workers: int = 1, progress: bool = True) -> RunReport:
    """
    Ejecuta el experimento completo.

    Args:
        config: experimento validado
        workers: procesos de joblib (BJLAB_THREADS)
        progress: barra tqdm sobre los ensayos despachados

    Returns:
        RunReport con filas en orden (eps, ensayo) sin importar los workers
    """
    tasks = plan_tasks(config)
    logger.info(f"[PASO 1/2] {config.mode}: {len(tasks)} ensayos, seed={config.seed}, workers={workers}")

    start = time.perf_counter()
    iterator = tqdm(tasks, desc=config.mode, disable=not progress, leave=False)
    if workers > 1:
        outcomes = Parallel(n_jobs=workers)(delayed(_execute)(config, task) for task in iterator)
    else:
        outcomes = [_execute(config, task) for task in iterator]
    wall_time = time.perf_counter() - start

    rows = pd.DataFrame([o.row for o in outcomes])
    witnesses = {}
    for index, outcome in enumerate(outcomes):
        if outcome.status == 'boundary':
            logger.warning(f"⚠️ Ensayo {outcome.row['trial']} en la banda de frontera "
                           f"(eps={outcome.row.get('epsilon')})")
        elif outcome.status == 'fail':
            logger.error(f"❌ Ensayo {outcome.row['trial']} falló (eps={outcome.row.get('epsilon')})")
            if outcome.witness is not None:
                witnesses[index] = outcome.witness

    summary = summarize(config, rows, wall_time)
    logger.info(f"[PASO 2/2] pass={summary['pass']} fail={summary['fail']} "
                f"boundary={summary['boundary']} en {summary['wall_time_s']}s")
    if summary['fail'] == 0:
        logger.info("✅ Todos los ensayos consistentes")
    return RunReport(mode=config.mode, rows=rows, summary=summary, witnesses=witnesses)


# ============================================================================
# ESCRITURA
# ============================================================================

def write_csv(report: RunReport, path: str):
    """CSV UTF-8, fin de línea \\n, decimales con 17 dígitos significativos."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as fh:
        fh.write(f"{CSV_HEADER} mode={report.mode}\n")
        report.rows.to_csv(fh, float_format=FLOAT_FORMAT, lineterminator='\n', index=False)
    logger.info(f"💾 Reporte guardado: {path}")


def write_witnesses(report: RunReport, path: str) -> Optional[str]:
    """Testigos YAML de los ensayos fallidos, uno por documento."""
    if not report.witnesses:
        return None
    witness_path = f"{os.path.splitext(path)[0]}.failures.yaml"
    with open(witness_path, 'w', encoding='utf-8', newline='') as fh:
        for index, text in sorted(report.witnesses.items()):
            fh.write(f"--- # fila {index}\n{text}")
    logger.info(f"💾 Testigos de fallos: {witness_path}")
    return witness_path

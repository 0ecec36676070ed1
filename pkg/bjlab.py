"""
BJLAB - Laboratorio de Ortogonalidad de Birkhoff-James
Orquestador principal: config YAML -> ensayos -> CSV + resumen JSON

Uso:
    python bjlab.py <mode> --config <path> [--seed N] [--out <path>]

Códigos de salida:
    0  todos los ensayos consistentes (los de frontera se informan aparte)
    1  config inválida, error de dominio o de E/S
    2  algún ensayo falló
"""

import sys
import json
import argparse
from typing import List, Optional

from dotenv import load_dotenv

from src.geometry.errors import BJLabError
from src.harness.config import MAX_SEED, MODES, RuntimeSettings, parse_config
from src.harness.runner import run, write_csv, write_witnesses
from src.utils.logging_setup import setup_logger

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAILED_TRIALS = 2
DEFAULT_OUTPUT_DIR = 'reports'


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='bjlab', description='Ensayos numéricos de ortogonalidad B-J')
    parser.add_argument('mode', choices=MODES, help='Modo de experimento')
    parser.add_argument('--config', required=True, help='Archivo YAML del experimento')
    parser.add_argument('--seed', type=int, default=None, help='Sobrescribe la seed de la config')
    parser.add_argument('--out', default=None, help='Ruta del CSV (sobrescribe output)')
    parser.add_argument('--no-progress', action='store_true', help='Oculta la barra de progreso')
    parser.add_argument('-v', '--verbose', action='store_true', help='Logs DEBUG en consola')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    load_dotenv()

    try:
        settings = RuntimeSettings.from_env()
    except BJLabError as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_ERROR
    logger = setup_logger(settings.log_dir, verbose=args.verbose)

    logger.info("==================================================")
    logger.info(f"   BJLAB - {args.mode}")
    logger.info("==================================================")

    # ---------------------------------------------------------
    # Config
    # ---------------------------------------------------------
    try:
        with open(args.config, encoding='utf-8') as fh:
            config = parse_config(fh.read(), mode=args.mode)
    except OSError as e:
        logger.error(f"❌ No se pudo leer la config: {e}")
        return EXIT_ERROR
    except BJLabError as e:
        logger.error(f"❌ Config inválida: {e}")
        return EXIT_ERROR

    if args.seed is not None:
        if not 0 <= args.seed <= MAX_SEED:
            logger.error(f"❌ --seed debe estar en [0, 2^64), recibido {args.seed}")
            return EXIT_ERROR
        config.seed = args.seed
    output = args.out or config.output or f"{DEFAULT_OUTPUT_DIR}/{config.mode}_seed{config.seed}.csv"

    # ---------------------------------------------------------
    # Ejecución
    # ---------------------------------------------------------
    try:
        report = run(config, workers=settings.threads, progress=not args.no_progress)
    except BJLabError as e:
        logger.error(f"❌ Error de dominio durante la ejecución: {e}")
        return EXIT_ERROR

    try:
        write_csv(report, output)
        write_witnesses(report, output)
    except OSError as e:
        logger.error(f"❌ Error escribiendo el reporte: {e}")
        return EXIT_ERROR

    print(json.dumps(report.summary, ensure_ascii=False))

    if report.failed:
        logger.error(f"❌ {report.summary['fail']} ensayos fallidos")
        return EXIT_FAILED_TRIALS
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

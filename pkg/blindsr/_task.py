"""Tasks of a blindsr run and the runners that execute them.

An experiment is a small graph: images are ingested, DoTNet and the SR
networks are trained, and the evaluation reads their checkpoints. Every node
is a :class:`BaseTask` whose ancestors produce its input files.
"""
import contextlib
import datetime
import logging
import os
import threading
import time
from multiprocessing import Pool, cpu_count

import psutil

logger = logging.getLogger(__name__)

_GB = float(2**30)

# Columns of the resource usage file and their rounding.
USAGE_COLUMNS = (
    ('Date and time (UTC)', None),
    ('Elapsed (s)', 1),
    ('CPU time (s)', 1),
    ('CPU (%)', None),
    ('Memory (GB)', 3),
    ('Memory (%)', 1),
    ('Disk read (GB)', 3),
    ('Disk write (GB)', 3),
)


def _process_usage(proc):
    """CPU time, CPU percent, RSS, memory percent and disk I/O of `proc`."""
    times = proc.cpu_times()
    io_counters = getattr(proc, 'io_counters', None)
    io_counters = io_counters() if io_counters else None
    return [
        times.user + times.system,
        proc.cpu_percent(),
        proc.memory_info().rss / _GB,
        proc.memory_percent(),
        io_counters.read_bytes / _GB if io_counters else 0.,
        io_counters.write_bytes / _GB if io_counters else 0.,
    ]


def _usage_lines(process, start_time, children=True):
    """Yield the header and then one tab separated line per call."""
    yield '\t'.join(name for name, _ in USAGE_COLUMNS) + '\n'

    # Finished processes keep their CPU time and disk I/O, nothing else.
    totals = {}
    while process.is_running():
        members = [process]
        try:
            if children:
                members.extend(process.children(recursive=True))
            for proc in totals:
                if proc not in members:
                    totals[proc][1:4] = [0., 0., 0.]
            for proc in members:
                totals[proc] = _process_usage(proc)
        except (OSError, psutil.AccessDenied, psutil.NoSuchProcess):
            continue

        values = [time.time() - start_time]
        values.extend(sum(column) for column in zip(*totals.values()))
        values = [
            value if digits is None else round(value, digits)
            for value, (_, digits) in zip(values, USAGE_COLUMNS[1:])
        ]
        values.insert(0, datetime.datetime.utcnow())
        yield '\t'.join(str(value) for value in values) + '\n'


@contextlib.contextmanager
def resource_usage_logger(pid, filename, interval=1, children=True):
    """Sample the resource usage of `pid` every `interval` seconds.

    The samples are written to `filename` as tab separated text by a
    background thread while the context is active.
    """
    stop = threading.Event()

    def _write():
        process = psutil.Process(pid)
        with open(filename, 'w') as file:
            for line in _usage_lines(process, time.time(), children):
                file.write(line)
                file.flush()
                if stop.wait(interval):
                    break

    writer = threading.Thread(target=_write, daemon=True)
    writer.start()
    try:
        yield
    finally:
        stop.set()
        writer.join()


class BaseTask:
    """Base class for defining task classes.

    A task produces files; ``run`` first runs all ancestors and hands their
    output files to ``_run``.

    Attributes
    ----------
    ancestors: list of BaseTask
    name: str
        Unique within a run, also decides the order tasks are started in.
    output_files: list of str
        None until the task has run.
    wall_time: float
        Seconds spent in ``_run``, None until the task has run.
    phase_times: dict
        Part of ``wall_time`` the task attributes to other phases.
    """

    def __init__(self, ancestors=None, name=''):
        self.ancestors = [] if ancestors is None else ancestors
        self.name = name
        self.output_files = None
        self.wall_time = None
        self.phase_times = {}

    def flatten(self):
        """Return the task and all of its ancestors as a set."""
        tasks = {self}
        for task in self.ancestors:
            tasks |= task.flatten()
        return tasks

    def run(self, input_files=None):
        """Run the ancestors, then this task, unless it already ran."""
        if self.output_files:
            return self.output_files
        input_files = [] if input_files is None else input_files
        for task in self.ancestors:
            input_files.extend(task.run())
        logger.info("Starting task %s in process [%s]", self.name,
                    os.getpid())
        start = time.perf_counter()
        self.output_files = self._run(input_files)
        self.wall_time = time.perf_counter() - start
        logger.info("Successfully completed task %s in %.1f s", self.name,
                    self.wall_time)
        return self.output_files

    def _run(self, input_files):
        raise NotImplementedError(
            "Method should be implemented by child class")

    def describe(self):
        """Indented description of the ancestors."""
        if not self.ancestors:
            return 'ancestors:\nNone'
        parts = []
        for task in self.ancestors:
            parts.append('\n'.join('\t' + line
                                   for line in str(task).split('\n')))
        return 'ancestors:\n' + '\n\n'.join(parts)

    def __str__(self):
        return "{}: {}\n{}".format(type(self).__name__, self.name,
                                   self.describe())


def get_flattened_tasks(tasks):
    """Return a set of all tasks and their ancestors in `tasks`."""
    flat = set()
    for task in tasks:
        flat |= task.flatten()
    return flat


def get_independent_tasks(tasks):
    """Return the tasks that are no other task's ancestor."""
    flat = get_flattened_tasks(tasks)
    ancestors = {a for task in flat for a in task.ancestors}
    return flat - ancestors


def run_tasks(tasks, max_parallel_tasks=None):
    """Run `tasks` and their ancestors.

    Parameters
    ----------
    tasks: iterable of BaseTask
    max_parallel_tasks: int, optional
        1 runs everything in this process, otherwise a process pool of this
        size (all CPUs when None) is used.
    """
    if max_parallel_tasks == 1:
        _run_tasks_sequential(tasks)
    else:
        _run_tasks_parallel(tasks, max_parallel_tasks)


def _by_name(tasks):
    return sorted(tasks, key=lambda t: t.name)


def _run_tasks_sequential(tasks):
    """Run tasks one after the other, ancestors first."""
    logger.info("Running %s tasks sequentially",
                len(get_flattened_tasks(tasks)))
    for task in _by_name(get_independent_tasks(tasks)):
        task.run()


def _run_tasks_parallel(tasks, max_parallel_tasks=None):
    """Run tasks in a process pool as soon as their ancestors are done."""
    waiting = get_flattened_tasks(tasks)
    total = len(waiting)
    running = {}
    logger.info("Running %s tasks using at most %s processes", total,
                max_parallel_tasks or cpu_count())

    pool = Pool(processes=max_parallel_tasks)
    while waiting or running:
        for task in _by_name(waiting):
            if all(a not in waiting and a not in running
                   for a in task.ancestors):
                running[task] = pool.apply_async(_run_task, [task])
                waiting.discard(task)

        finished = [task for task, result in running.items() if result.ready()]
        for task in finished:
            (task.output_files, task.wall_time,
             task.phase_times) = running.pop(task).get()
        if finished:
            logger.info(
                "Progress: %s tasks running, %s waiting for ancestors, "
                "%s/%s done", len(running), len(waiting),
                total - len(running) - len(waiting), total)
        if running:
            time.sleep(0.1)

    pool.close()
    pool.join()


def _run_task(task):
    """Run `task` in a worker and return what the parent needs back."""
    output_files = task.run()
    return output_files, task.wall_time, task.phase_times

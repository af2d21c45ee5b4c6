import os
from functools import partial
from multiprocessing.pool import ThreadPool

import pytest

import blindsr
from blindsr._task import (BaseTask, _run_tasks_parallel,
                           _run_tasks_sequential, run_tasks)


@pytest.fixture
def example_tasks():
    """Example tasks for testing the task runners."""
    tasks = set()
    for i in range(3):
        task = BaseTask(
            name=f'task{i}',
            ancestors=[
                BaseTask(name=f'task{i}-ancestor{j}') for j in range(3)
            ],
        )
        tasks.add(task)

    return tasks


@pytest.mark.parametrize('max_parallel_tasks', [1, 2, 3, 4, 16, None])
def test_run_tasks(monkeypatch, tmp_path, max_parallel_tasks, example_tasks):
    """Check that tasks are run correctly."""
    def _run(self, input_files):
        output_file = tmp_path / self.name

        msg = ('running {} in thread {}, using input {}, generating {}'.format(
            self.name, os.getpid(), input_files, output_file))
        print(msg)

        # Check that the output is created just once
        assert not output_file.exists()
        output_file.write_text(msg)
        output_file = str(output_file)

        # Check that ancestor results are provided correctly
        assert len(self.ancestors) == len(input_files)
        for ancestor in self.ancestors:
            assert len(ancestor.output_files) == 1
            assert ancestor.output_files[0].startswith(output_file)
            assert str(tmp_path / ancestor.name) in input_files

        return [output_file]

    monkeypatch.setattr(BaseTask, '_run', _run)

    run_tasks(example_tasks, max_parallel_tasks)

    for task in example_tasks:
        print(task.name, task.output_files)
        assert task.output_files
        assert task.wall_time >= 0.


ANCESTORS = [f'task{i}-ancestor{j}' for i in range(3) for j in range(3)]


@pytest.mark.parametrize('runner, expected', [
    (_run_tasks_sequential, [
        name for i in range(3)
        for name in ANCESTORS[3 * i:3 * i + 3] + [f'task{i}']
    ]),
    (partial(_run_tasks_parallel, max_parallel_tasks=1),
     ANCESTORS + ['task0', 'task1', 'task2']),
])
def test_runner_order_follows_names(monkeypatch, runner, expected,
                                    example_tasks):
    """Check that the runners start tasks in a reproducible order."""
    order = []

    def _run(self, input_files):
        order.append(self.name)
        return [f'{self.name}_test.npz']

    monkeypatch.setattr(BaseTask, '_run', _run)
    monkeypatch.setattr(blindsr._task, 'Pool', ThreadPool)

    runner(example_tasks)
    print(order)
    assert order == expected


def test_task_runs_once():
    calls = []

    class CountingTask(BaseTask):
        def _run(self, input_files):
            calls.append(list(input_files))
            return [self.name + '.out']

    ancestor = CountingTask(name='first')
    task = CountingTask(ancestors=[ancestor], name='second')
    assert task.run() == ['second.out']
    assert task.run() == ['second.out']
    assert calls == [[], ['first.out']]
    assert 'ancestors:' in str(task)
    assert str(task).startswith('CountingTask: second')


def test_base_task_needs_run():
    with pytest.raises(NotImplementedError):
        BaseTask(name='abstract').run()

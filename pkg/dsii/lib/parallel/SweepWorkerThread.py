import queue
import threading
from types import SimpleNamespace


class SweepWorkerThread(threading.Thread):
    """
    Worker thread that evaluates sweep tasks (one spectral or spatial sample each)
    """

    def __init__(self, thread_id, function, task_queue: queue.Queue, thread_lock: threading.Lock, **kwargs):
        """
        Initializes a new Worker (is run in daemon mode)
        :param thread_id: ID of this thread
        :param function: The function applied to each task argument
        :param task_queue: A queue object where the worker can get more tasks
        :param thread_lock: A thread lock object to acquire and release thread locks
        :param kwargs: Keyword Args, see below for more information

        kwargs:
            on_task_completed: Function called as func(task, result, error) after each task
        """
        super().__init__()
        self.daemon = True
        self.thread_id = thread_id
        self.task_queue = task_queue
        self.thread_lock = thread_lock
        self._should_exit = False
        self._function = function
        self._on_task_completed = kwargs.get("on_task_completed", None)

    def run(self):
        """
        Start the worker. Worker runs until stop() is called or the queue is drained
        :return: None
        """
        while not self._should_exit:
            self.thread_lock.acquire()

            if self.task_queue.empty():
                self.thread_lock.release()
                return

            task: SimpleNamespace = self.task_queue.get()
            self.thread_lock.release()

            result, error = None, None
            try:
                result = self._function(task.argument)
            except Exception as caught:
                error = caught

            if self._on_task_completed is not None:
                self._on_task_completed(task, result, error)

    def stop(self):
        """
        Stops the worker after its current task is finished
        :return: None
        """
        self._should_exit = True

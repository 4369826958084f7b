"""HTTP service: API app, job queue, persistence."""

from lyrivid.service.app import create_app
from lyrivid.service.config import ServiceConfig
from lyrivid.service.jobs import Job, JobQueue
from lyrivid.service.storage import ProjectStore

__all__ = ["Job", "JobQueue", "ProjectStore", "ServiceConfig", "create_app"]

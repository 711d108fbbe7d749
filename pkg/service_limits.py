import hashlib
import json
import logging
import os

from flask import jsonify, request
from flask_caching import Cache
from flask_limiter import Limiter
from flask_limiter.util import get_remote_address

logger = logging.getLogger(__name__)

RATE_LIMIT = os.getenv("QDEPH_RATE_LIMIT", "30 per minute")


class ReportCache:
    """Campaign reports keyed by a hash of their config; campaigns are deterministic"""

    def __init__(self, cache):
        self.cache = cache
        self.cache_stats = {"hits": 0, "misses": 0, "sets": 0}

    def get_cache_key(self, prefix, payload):
        key_data = json.dumps(payload, sort_keys=True, default=str)
        return f"{prefix}:{hashlib.md5(key_data.encode()).hexdigest()}"

    def get(self, key):
        result = self.cache.get(key)
        if result is None:
            self.cache_stats["misses"] += 1
        else:
            self.cache_stats["hits"] += 1
            logger.info(f"Cache hit: {key}")
        return result

    def set(self, key, value, timeout=None):
        try:
            self.cache.set(key, value, timeout=timeout)
            self.cache_stats["sets"] += 1
        except Exception as e:
            logger.warning(f"Failed to cache result for {key}: {e}")

    def get_stats(self):
        total_requests = self.cache_stats["hits"] + self.cache_stats["misses"]
        hit_rate = (self.cache_stats["hits"] / total_requests * 100) if total_requests > 0 else 0
        return {**self.cache_stats, "hit_rate": round(hit_rate, 2), "total_requests": total_requests}


def setup_rate_limiting_and_caching(app):
    """Initialize rate limiting and report caching for the Flask app"""
    cache_config = {
        "CACHE_TYPE": os.getenv("CACHE_TYPE", "SimpleCache"),
        "CACHE_DEFAULT_TIMEOUT": int(os.getenv("CACHE_DEFAULT_TIMEOUT", "600")),
    }

    redis_url = os.getenv("REDIS_URL")
    if redis_url:
        cache_config.update({"CACHE_TYPE": "RedisCache", "CACHE_REDIS_URL": redis_url})

    cache = Cache(app, config=cache_config)
    report_cache = ReportCache(cache)

    limiter = Limiter(
        key_func=get_remote_address,
        app=app,
        default_limits=["1000 per hour"],
        storage_uri=redis_url or "memory://",
    )

    @app.errorhandler(429)
    def ratelimit_handler(e):
        logger.warning(f"Rate limit hit - Client: {get_remote_address()}, Endpoint: {request.path}, Limit: {e.description}")
        return jsonify({
            "success": False,
            "error": "Rate limit exceeded",
            "message": f"Too many requests. Limit: {e.description}",
        }), 429

    return limiter, cache, report_cache

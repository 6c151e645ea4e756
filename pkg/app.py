from lincat.api import app

if __name__ == "__main__":
    import uvicorn

    from lincat.config import settings
    from lincat.logs import setup_logging

    setup_logging(settings.log_level)
    uvicorn.run(app, host="0.0.0.0", port=8000)

import os

import uvicorn
from dotenv import load_dotenv


def main():
    """
    Start the FastAPI application server.
    """
    load_dotenv()
    uvicorn.run(
        "app.main:app",
        host=os.getenv("OU_KIT_HOST", "0.0.0.0"),
        port=int(os.getenv("OU_KIT_PORT", "8000")),
        reload=os.getenv("OU_KIT_RELOAD", "false").lower() == "true",
        log_level=os.getenv("OU_KIT_LOG_LEVEL", "INFO").lower(),
    )


if __name__ == "__main__":
    main()
